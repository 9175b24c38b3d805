#include <cstring>

#include "doctest.h"

#include "bimembrane/frequency.hpp"
#include "bimembrane/thin_limits.hpp"
#include "support.hpp"

using namespace bimembrane;

namespace {

std::pair<ScalarField, ScalarField> boundary_only(const MembranePair& ref) {
    const Lattice& lat = ref.h.lattice();
    ScalarField dh(ref.h.lattice_ptr(), 0.0);
    ScalarField dw(ref.h.lattice_ptr(), 0.0);
    for (std::size_t k = 0; k < lat.spec().size(); ++k) {
        if (lat.kind(k) != NodeKind::Boundary) continue;
        dh[k] = ref.h[k];
        dw[k] = ref.w[k];
    }
    return {dh, dw};
}

}  // namespace

TEST_CASE("half-disk lattice geometry") {
    const auto lat = half_disk_lattice(0.25);
    CHECK(lat->spec().nx == 9);
    CHECK(lat->spec().ny == 5);
    CHECK(on_thin_row(*lat, 0));
    CHECK_FALSE(on_thin_row(*lat, 1));
    CHECK(thin_free(*lat, 4, 0));
    CHECK_FALSE(thin_free(*lat, 0, 0));
    CHECK_THROWS_AS(half_disk_lattice(0.3), std::invalid_argument);
}

TEST_CASE("split and recombine are inverse") {
    const auto lat = half_disk_lattice(1.0 / 8);
    testing::Rng rng(9);
    ScalarField h(lat, 0.0), w(lat, 0.0);
    for (std::size_t k = 0; k < lat->spec().size(); ++k) {
        if (!lat->masked(k)) continue;
        h[k] = rng.uniform(-1, 1);
        w[k] = rng.uniform(-1, 1);
    }
    const MembranePair p{h, w, 0.7, 0.3};
    const auto [w1, w2] = split_membranes(p);
    const MembranePair q = recombine_membranes(w1, w2, 0.7, 0.3);
    CHECK(sup_distance(q.h, h) < 1e-14);
    CHECK(sup_distance(q.w, w) < 1e-14);
}

TEST_CASE("reference pair is ordered on the thin row") {
    const auto lat = half_disk_lattice(1.0 / 16);
    const MembranePair ref = reference_signorini_pair(0.7, 0.3, lat);
    for (int i = 0; i < lat->spec().nx; ++i) {
        if (lat->masked(i, 0)) CHECK(ref.h.at(i, 0) >= ref.w.at(i, 0) - 1e-15);
    }
}

TEST_CASE("two-membrane solver approaches the reference and satisfies complementarity") {
    double previous = std::numeric_limits<double>::infinity();
    for (int n : {16, 32}) {
        const auto lat = half_disk_lattice(1.0 / n);
        const MembranePair ref = reference_signorini_pair(0.7, 0.3, lat);
        const auto [dh, dw] = boundary_only(ref);
        const MembranePair sol = solve_two_membrane(dh, dw, 0.7, 0.3);
        CHECK(sol.converged);
        const double err = std::max(sup_distance(sol.h, ref.h), sup_distance(sol.w, ref.w));
        CHECK(err < previous);
        previous = err;
        CHECK(complementarity_audit(sol).max_residual < 1e-6);
        for (int i = 0; i < lat->spec().nx; ++i) {
            if (lat->masked(i, 0)) CHECK(sol.h.at(i, 0) >= sol.w.at(i, 0) - 1e-12);
        }
    }
}

TEST_CASE("threaded sweeps converge to the same discrete solution") {
    const auto lat = half_disk_lattice(1.0 / 16);
    const MembranePair ref = reference_signorini_pair(0.6, 0.4, lat);
    const auto [dh, dw] = boundary_only(ref);
    ThinOptions par;
    par.threads = 2;
    const MembranePair a = solve_two_membrane(dh, dw, 0.6, 0.4);
    const MembranePair b = solve_two_membrane(dh, dw, 0.6, 0.4, par);
    CHECK(sup_distance(a.h, b.h) < 1e-7);
}

TEST_CASE("symmetric transmission data give bitwise equal membranes") {
    const auto lat = half_disk_lattice(1.0 / 16);
    const ScalarField d = make_field(lat, [](double x, double y) { return std::exp(x) * std::cos(y) + y; });
    const MembranePair p = solve_transmission(d, d, 0.5, 0.5);
    CHECK(std::memcmp(p.h.values().data(), p.w.values().data(), p.h.values().size_bytes()) == 0);
}

TEST_CASE("transmission with a flux-balanced odd part is exact to second order") {
    auto solve_at = [](int n) {
        const auto lat = half_disk_lattice(1.0 / n);
        auto a = [](double x, double y) { return std::exp(x) * std::cos(y); };
        auto b = [](double x, double y) { return -std::exp(x) * std::sin(y); };
        const ScalarField dh = make_field(lat, [&](double x, double y) { return a(x, y) + 0.3 * b(x, y); });
        const ScalarField dw = make_field(lat, [&](double x, double y) { return a(x, y) - 0.7 * b(x, y); });
        return std::pair{solve_transmission(dh, dw, 0.7, 0.3), dh};
    };
    const auto [p16, d16] = solve_at(16);
    const auto [p32, d32] = solve_at(32);
    CHECK(sup_distance(p16.h, d16) < 5e-3);
    CHECK(sup_distance(p32.h, d32) < sup_distance(p16.h, d16));
}

TEST_CASE("Neumann harmonic solver reproduces functions even in y") {
    const auto lat = half_disk_lattice(1.0 / 16);
    const ScalarField d = make_field(lat, [](double x, double y) { return x * x - y * y + 2 * x; });
    const ScalarField f = solve_neumann_harmonic(d);
    CHECK(sup_distance(f, d) < 1e-7);
}

TEST_CASE("membrane energy") {
    const auto lat = half_disk_lattice(1.0 / 8);
    const MembranePair c{ScalarField(lat, 2.0), ScalarField(lat, -1.0), 0.5, 0.5};
    CHECK(membrane_energy(c) == 0.0);
    const MembranePair ref = reference_signorini_pair(0.7, 0.3, lat);
    CHECK(membrane_energy(ref) > 0.0);
}

TEST_CASE("invalid inputs are rejected") {
    const auto lat = half_disk_lattice(1.0 / 8);
    const ScalarField d(lat, 0.0);
    CHECK_THROWS_AS(solve_two_membrane(d, d, 0.0, 1.0), std::invalid_argument);
    ThinOptions capped;
    capped.max_sweeps = 1;
    const MembranePair ref = reference_signorini_pair(0.7, 0.3, lat);
    const auto [dh, dw] = boundary_only(ref);
    CHECK_THROWS_AS(solve_two_membrane(dh, dw, 0.7, 0.3, capped), std::runtime_error);
    capped.throw_on_cap = false;
    CHECK_FALSE(solve_two_membrane(dh, dw, 0.7, 0.3, capped).converged);
}
