#include <cstring>

#include "doctest.h"

#include "bimembrane/solver.hpp"
#include "support.hpp"

using namespace bimembrane;

TEST_CASE("harmonic extension reproduces harmonic quadratics exactly") {
    const auto lat = testing::disk_lattice(1.0 / 16);
    auto fn = [](double x, double y) { return x * x - y * y + 0.5 * x * y + y; };
    const ScalarField exact = make_field(lat, fn);
    ScalarField data(lat, 0.0);
    for (std::size_t k = 0; k < lat->spec().size(); ++k) {
        if (lat->kind(k) == NodeKind::Boundary) data[k] = exact[k];
    }
    const ScalarField f = harmonic_extension(data, {1e-13, 100000, 0});
    CHECK(sup_distance(f, exact) < 1e-9);
}

TEST_CASE("harmonic_solve keeps fixed nodes and rejects free boundary nodes") {
    const auto lat = testing::disk_lattice(0.125);
    ScalarField data(lat, 1.0);
    std::vector<std::uint8_t> free(lat->spec().size(), 0);
    const std::size_t c = lat->spec().index(8, 8);
    free[c] = 1;
    data[c] = 5.0;
    const ScalarField f = harmonic_solve(data, free);
    CHECK(f[c] == doctest::Approx(1.0));
    std::vector<std::uint8_t> bad(lat->spec().size(), 0);
    for (std::size_t k = 0; k < lat->spec().size(); ++k) {
        if (lat->kind(k) == NodeKind::Boundary) {
            bad[k] = 1;
            break;
        }
    }
    CHECK_THROWS_AS(harmonic_solve(data, bad), std::invalid_argument);
}

TEST_CASE("sharp level of the smoothed plane profile") {
    CHECK(boundary_level(SmoothingKind::Concave) == doctest::Approx(1.0 - std::sin(1.0)).epsilon(1e-9));
    CHECK(boundary_level(SmoothingKind::Cubic) > 0.0);
    CHECK(boundary_level(SmoothingKind::Cubic) < 1.0);
    CHECK(boundary_level(SmoothingKind::Concave, 0.5) > boundary_level(SmoothingKind::Concave));
}

TEST_CASE("solve options validation and defaults") {
    const SolveOptions o = SolveOptions{}.resolved(0.125);
    REQUIRE(o.delta_schedule.size() == 3);
    CHECK(o.delta_schedule.front() == doctest::Approx(1.0));
    CHECK(o.step0 == doctest::Approx(0.125 * 0.125 / 8.0));
    SolveOptions bad;
    bad.delta_schedule = {0.1, 0.2};
    CHECK_THROWS_AS(bad.resolved(0.1), std::invalid_argument);
    bad.delta_schedule = {0.1};
    bad.max_outer = 0;
    CHECK_THROWS_AS(bad.resolved(0.1), std::invalid_argument);
}

TEST_CASE("boundary data must be ordered") {
    const auto lat = testing::disk_lattice(0.125);
    const auto data = BoundaryData::from_generators(
        lat, [](double, double y) { return y; }, [](double, double) { return 0.0; });
    CHECK_THROWS_AS(data.validate(), std::invalid_argument);
}

TEST_CASE("plane data are recovered, ordered and deterministic") {
    const double h = 1.0 / 32;
    const auto lat = testing::disk_lattice(h);
    const Params p{0.7, 0.3};
    const auto data = BoundaryData::from_generators(
        lat, [](double, double y) { return std::sqrt(0.7) * std::max(y, 0.0); },
        [](double, double y) { return std::sqrt(0.3) * std::max(y, 0.0); });
    const SolveResult a = solve(data, p, {});
    CHECK(a.converged);
    CHECK_NOTHROW(a.pair.validate());
    const FieldPair ref = reference_plane_pair(p, {0.0, 1.0}, lat);
    CHECK(std::max(sup_distance(a.pair.u, ref.u), sup_distance(a.pair.v, ref.v)) < 0.08);
    // Boundary values are untouched.
    for (std::size_t k = 0; k < lat->spec().size(); ++k) {
        if (lat->kind(k) == NodeKind::Boundary) CHECK(a.pair.u[k] == data.u0[k]);
    }
    // Energy trace is nonincreasing within each smoothing stage.
    for (std::size_t k = 1; k < a.energy_trace.size(); ++k) {
        if (a.energy_trace[k].delta == a.energy_trace[k - 1].delta && a.energy_trace[k].delta > 0.0) {
            CHECK(a.energy_trace[k].total_smoothed <= a.energy_trace[k - 1].total_smoothed + 1e-12);
        }
    }
    const SolveResult b = solve(data, p, {});
    CHECK(std::memcmp(a.pair.u.values().data(), b.pair.u.values().data(), a.pair.u.values().size_bytes()) == 0);
    CHECK(std::memcmp(a.pair.v.values().data(), b.pair.v.values().data(), a.pair.v.values().size_bytes()) == 0);
}

TEST_CASE("red-black threaded sweeps agree with sequential sweeps") {
    const double h = 1.0 / 32;
    const auto lat = testing::disk_lattice(h);
    const Params p{0.6, 0.4};
    const auto data = BoundaryData::from_generators(
        lat, [](double x, double y) { return std::sqrt(0.6) * std::max(0.0, y + 0.2 * x); },
        [](double x, double y) { return std::sqrt(0.4) * std::max(0.0, y + 0.2 * x); });
    SolveOptions seq;
    SolveOptions par;
    par.threads = 2;
    const SolveResult a = solve(data, p, seq);
    const SolveResult b = solve(data, p, par);
    CHECK(b.converged);
    CHECK(sup_distance(a.pair.u, b.pair.u) < 5e-3);
    CHECK(sup_distance(a.pair.v, b.pair.v) < 5e-3);
}

TEST_CASE("zero data stay zero") {
    const auto lat = testing::disk_lattice(0.125);
    const auto data = BoundaryData::from_generators(
        lat, [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
    const SolveResult r = solve(data, {0.5, 0.5}, {});
    CHECK(r.pair.u.sup_norm() == 0.0);
    CHECK(r.pair.v.sup_norm() == 0.0);
}

TEST_CASE("Laplacian ball mass of a harmonic field vanishes") {
    const auto lat = testing::disk_lattice(1.0 / 16);
    const ScalarField f = make_field(lat, [](double x, double y) { return x * y + x; });
    CHECK(std::abs(laplacian_ball_mass(f, {0.0, 0.0}, 0.5)) < 1e-12);
    const ScalarField g = make_field(lat, [](double x, double y) { return x * x + y * y; });
    // Lap = 4, mass = 4 * (h^2 * nodes in the ball), close to 4 pi r^2.
    CHECK(laplacian_ball_mass(g, {0.0, 0.0}, 0.5) == doctest::Approx(M_PI).epsilon(0.05));
}
