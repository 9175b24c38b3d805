#include "doctest.h"

#include "bimembrane/frequency.hpp"
#include "support.hpp"

using namespace bimembrane;

namespace {

/// Synthetic trace with Htilde = K r^p and exact derivative, no boundary terms.
FrequencyTrace power_trace(double K, double p, double sigma = 0.1) {
    FrequencyTrace t;
    t.sigma = sigma;
    for (double r = 0.05; r <= 0.45; r *= 1.2) {
        FrequencyRow row;
        row.r = r;
        row.H = row.Htilde = K * std::pow(r, p);
        row.dHtilde_bulk = row.dHtilde_diff = K * p * std::pow(r, p - 1.0);
        t.rows.push_back(row);
    }
    truncated_frequency(t);
    return t;
}

}  // namespace

TEST_CASE("height of a planted profile matches its closed form") {
    const double h = 1.0 / 128;
    const auto lat = testing::disk_lattice(h);
    const Params p{0.7, 0.3};
    for (double lambda : {1.0, 1.5, 2.0}) {
        const double a = 0.5;
        const FieldPair pair = planted_profile_pair(p, lat, lambda, a);
        for (double r : {0.1, 0.2, 0.4}) {
            // r^-1 * int_0^pi (a r^lambda cos(lambda theta))^2 r dtheta, summed over Lu + Lv = 1.
            const double exact = a * a * std::pow(r, 2.0 * lambda) *
                                 (M_PI / 2.0 + std::sin(2.0 * lambda * M_PI) / (4.0 * lambda));
            const double H = height_with_angles(pair, {0.0, 0.0}, {0.0, 1.0}, r, 512, true);
            CHECK(H == doctest::Approx(exact).epsilon(2e-3));
        }
    }
}

TEST_CASE("w fields of the exact plane vanish") {
    const auto lat = testing::disk_lattice(1.0 / 32);
    const FieldPair pair = reference_plane_pair({0.7, 0.3}, {0.0, 1.0}, lat);
    const WFields w = w_fields(pair, {0.0, 0.0}, {0.0, 1.0});
    for (std::size_t k = 0; k < lat->spec().size(); ++k) {
        if (!lat->masked(k) || pair.u[k] <= 0.0) continue;
        CHECK(std::abs(w.w_u[k]) < 1e-12);
    }
}

TEST_CASE("planted frequency is recovered") {
    const double h = 1.0 / 64;
    const auto lat = testing::disk_lattice(h);
    FrequencyOptions o;
    o.half_plane_phases = true;
    for (double lambda : {1.5, 2.0}) {
        const FieldPair pair = planted_profile_pair({0.7, 0.3}, lat, lambda, planted_amplitude(lambda, 10 * h, 0.1));
        const FrequencyTrace t = frequency_trace(pair, {0.0, 0.0}, {0.0, 1.0}, {0.16, 0.2, 0.25, 0.3, 0.4}, {}, o);
        for (const FrequencyRow& row : t.rows) {
            CHECK_FALSE(row.truncated);
            CHECK(row.Ntilde == doctest::Approx(lambda).epsilon(0.05 / lambda));
            CHECK(row.dHtilde_bulk == doctest::Approx(row.dHtilde_diff).epsilon(0.05));
        }
    }
}

TEST_CASE("truncation replaces small Htilde by r^(3 + sigma)") {
    const FrequencyTrace t = power_trace(1e-6, 4.0);
    for (const FrequencyRow& row : t.rows) {
        CHECK(row.truncated);
        CHECK(row.Ntilde == doctest::Approx(1.55));
    }
    const LowerBoundReport lb = lower_bound_check(t);
    CHECK(lb.vacuous);
    CHECK(lb.passed);
    CHECK_THROWS(cubic_height_check(t, 0.0));
    const CubicHeightReport all = cubic_height_check(t, 0.0, 2.7, true);
    CHECK(all.slope == doctest::Approx(4.0));
    CHECK(all.passed);
    CHECK(untruncated_frequency_min(t, 0.0) == doctest::Approx(2.0));
    CHECK(std::isinf(untruncated_frequency_min(t, 1.0)));
}

TEST_CASE("power-law traces give their exponent") {
    const FrequencyTrace t = power_trace(10.0, 3.0);
    for (const FrequencyRow& row : t.rows) {
        CHECK_FALSE(row.truncated);
        CHECK(row.Ntilde == doctest::Approx(1.5).epsilon(1e-3));
    }
    CHECK(lower_bound_check(t).passed);
    CHECK(cubic_height_check(t, 0.0).slope == doctest::Approx(3.0));
    CHECK(monotonicity_report(t).C == doctest::Approx(1e-3));
    const FrequencyTrace low = power_trace(10.0, 2.0);
    CHECK_FALSE(lower_bound_check(low).passed);
}

TEST_CASE("monotonicity constant grows with the decrease it must absorb") {
    FrequencyTrace t;
    t.sigma = 0.1;
    for (double r : {0.01, 0.02, 0.04, 0.08}) {
        FrequencyRow row;
        row.r = r;
        row.Ntilde = 2.0 - r;  // decreasing
        t.rows.push_back(row);
    }
    const MonotonicityReport rep = monotonicity_report(t);
    REQUIRE(std::isfinite(rep.C));
    for (std::size_t k = 0; k + 1 < t.rows.size(); ++k) {
        const double fa = (1 + rep.C * std::pow(t.rows[k].r, 0.1)) * t.rows[k].Ntilde;
        const double fb = (1 + rep.C * std::pow(t.rows[k + 1].r, 0.1)) * t.rows[k + 1].Ntilde;
        CHECK(fb >= fa - 1e-3);
    }
    t.rows[3].Ntilde = -100.0;
    CHECK(std::isinf(monotonicity_report(t).C));
}

TEST_CASE("log-log slope of an exact power") {
    std::vector<double> r, x;
    for (double s = 0.1; s < 1.0; s += 0.1) {
        r.push_back(s);
        x.push_back(-3.0 * std::pow(s, 2.5));
    }
    CHECK(loglog_slope(r, x) == doctest::Approx(2.5));
    CHECK(std::isnan(loglog_slope({0.1}, {1.0})));
}

TEST_CASE("Almgren quotient of r^(3/2) cos(3 theta / 2) on the half disk") {
    const double h = 1.0 / 128;
    const auto lat = Lattice::make(GridSpec{257, 129, h, -1.0, 0.0}, DomainSpec::half_disk(1.0));
    const ScalarField f = make_field(lat, [](double x, double y) {
        return std::pow(std::hypot(x, y), 1.5) * std::cos(1.5 * std::atan2(y, x));
    });
    const HomogeneityEstimate e = estimate_homogeneity(f, {0.0, 0.0}, {0.1, 0.2, 0.3});
    CHECK(e.extrapolated == doctest::Approx(1.5).epsilon(0.05 / 1.5));
}

TEST_CASE("default radii are increasing and respect the floor") {
    const auto radii = default_frequency_radii(1.0 / 64, 0.45);
    REQUIRE(radii.size() > 4);
    CHECK(radii.back() == doctest::Approx(0.45));
    CHECK(radii.front() >= 6.0 / 64 * (1 - 1e-12));
    for (std::size_t k = 1; k < radii.size(); ++k) CHECK(radii[k] > radii[k - 1]);
}

TEST_CASE("planted amplitude keeps the smallest radius above truncation") {
    for (double lambda : {1.0, 1.5, 2.0, 2.5}) {
        const double r_min = 10.0 / 128;
        const double a = planted_amplitude(lambda, r_min, 0.1);
        const double H = a * a * std::pow(r_min, 2 * lambda) * M_PI / 2.0;
        CHECK(H > std::pow(r_min, 3.1));
    }
}
