#include "doctest.h"

#include "bimembrane/free_boundary.hpp"
#include "support.hpp"

using namespace bimembrane;

TEST_CASE("level line of a linear field is one oriented polyline") {
    const auto lat = testing::square_lattice(0.1);
    const ScalarField f = make_field(lat, [](double x, double y) { return y - 0.03 - 0.2 * x; });
    const auto lines = extract_polylines(f, 0.0);
    REQUIRE(lines.size() == 1);
    const Polyline& line = lines.front();
    CHECK_FALSE(line.closed);
    for (const Point& p : line.vertices) CHECK(p.y == doctest::Approx(0.03 + 0.2 * p.x).epsilon(1e-12));
    // Positive side to the left: travelling in +x with y increasing into {f > 0}.
    CHECK(line.vertices.back().x > line.vertices.front().x);
}

TEST_CASE("circle level set is closed and second-order accurate") {
    const double h = 1.0 / 32;
    const auto lat = testing::square_lattice(h);
    const ScalarField f = make_field(lat, [](double x, double y) { return 0.25 - x * x - y * y; });
    const auto lines = extract_polylines(f, 0.0);
    REQUIRE(lines.size() == 1);
    CHECK(lines.front().closed);
    for (const Point& p : lines.front().vertices) CHECK(std::abs(norm(p) - 0.5) < h * h);
    // Inside is positive, so the closed curve runs counter-clockwise.
    double area = 0.0;
    const auto& v = lines.front().vertices;
    for (std::size_t k = 0; k + 1 < v.size(); ++k) area += v[k].x * v[k + 1].y - v[k + 1].x * v[k].y;
    CHECK(0.5 * area == doctest::Approx(M_PI * 0.25).epsilon(0.01));
}

TEST_CASE("estimate_normal on a straight line") {
    Polyline line;
    for (int k = 0; k <= 10; ++k) line.vertices.push_back({0.1 * k, 0.05 * k});
    const Point n = estimate_normal(line, {0.5, 0.25}, 0.3);
    const Point expected = (1.0 / std::hypot(0.05, 0.1)) * Point{-0.05, 0.1};
    CHECK(n.x == doctest::Approx(expected.x));
    CHECK(n.y == doctest::Approx(expected.y));
    Polyline tiny;
    tiny.vertices = {{0, 0}, {1, 0}};
    CHECK_THROWS_AS(estimate_normal(tiny, {0, 0}, 0.1), std::invalid_argument);
}

TEST_CASE("exact plane pair satisfies the two-phase Bernoulli condition") {
    const double h = 1.0 / 32;
    const auto lat = testing::disk_lattice(h);
    const Params p{0.7, 0.3};
    const FieldPair pair = reference_plane_pair(p, {0.0, 1.0}, lat);
    const BoundarySet bs = extract_boundaries(pair);
    REQUIRE_FALSE(bs.samples.empty());
    for (const FreeBoundarySample& s : bs.samples) {
        CHECK(s.phase == Phase::TwoPhase);
        if (std::isnan(s.residual)) continue;
        CHECK(s.residual < 1e-6);
        CHECK(s.grad_u == doctest::Approx(std::sqrt(0.7)));
        CHECK(s.normal.y == doctest::Approx(1.0));
    }
}

TEST_CASE("one-phase plane is classified and satisfies its own condition") {
    const auto lat = testing::disk_lattice(1.0 / 32);
    const Params p{0.7, 0.3};
    FieldPair pair = reference_plane_pair(p, {0.0, 1.0}, lat);
    pair.v = ScalarField(lat, 0.0);
    const BoundarySet bs = extract_boundaries(pair);
    REQUIRE_FALSE(bs.samples.empty());
    for (const FreeBoundarySample& s : bs.samples) {
        CHECK(s.phase == Phase::OnePhaseU);
        if (!std::isnan(s.residual)) CHECK(s.residual < 1e-6);
    }
    CHECK(bs.polyline_v.empty());
}

TEST_CASE("bernoulli residual by phase") {
    const Params p{0.7, 0.3};
    FreeBoundarySample s;
    s.grad_u = 1.0;
    s.grad_v = 0.5;
    s.phase = Phase::TwoPhase;
    CHECK(bernoulli_residual(p, s) == doctest::Approx(0.25));
    s.phase = Phase::OnePhaseU;
    CHECK(bernoulli_residual(p, s) == doctest::Approx(0.3));
    s.phase = Phase::OnePhaseV;
    CHECK(bernoulli_residual(p, s) == doctest::Approx(0.05));
}

TEST_CASE("proportionality, competitors and nondegeneracy on the plane") {
    const double h = 1.0 / 32;
    const auto lat = testing::disk_lattice(h);
    const Params p{0.7, 0.3};
    const FieldPair pair = reference_plane_pair(p, {0.0, 1.0}, lat);
    const ProportionalityFit fit = proportionality_fit(pair, {0.0, 0.0}, 0.3);
    CHECK(fit.c == doctest::Approx(std::sqrt(0.7 / 0.3)).epsilon(1e-12));
    CHECK(fit.rel_residual < 1e-12);
    CHECK_THROWS_AS(proportionality_fit(pair, {0.0, 0.0}, 2.0 * h), std::invalid_argument);

    const auto [m, q] = competitor_fields(pair);
    for (std::size_t k = 0; k < lat->spec().size(); ++k) {
        if (!lat->masked(k)) continue;
        const double y = std::max(0.0, pair.u[k] / std::sqrt(0.7));
        CHECK(m[k] == doctest::Approx(y));
        CHECK(q[k] == doctest::Approx(y));
    }

    const BoundarySet bs = extract_boundaries(pair);
    const NondegeneracyTable nd = nondegeneracy_scan(pair, bs, {0.1, 0.2});
    REQUIRE_FALSE(nd.rows.empty());
    // sup over B_r of sqrt(L) y^+ is sqrt(L) r up to one cell.
    CHECK(nd.min_ratio == doctest::Approx(std::sqrt(0.3)).epsilon(h / 0.1));
}

TEST_CASE("ball_sup matches brute force") {
    const auto lat = testing::disk_lattice(1.0 / 16);
    const ScalarField f = make_field(lat, [](double x, double y) { return std::sin(3 * x) * std::cos(2 * y); });
    testing::Rng rng(5);
    const GridSpec& s = lat->spec();
    for (int t = 0; t < 20; ++t) {
        const Point c{rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)};
        const double r = rng.uniform(0.1, 0.4);
        double best = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < s.ny; ++j) {
            for (int i = 0; i < s.nx; ++i) {
                if (lat->masked(i, j) && distance(s.node(i, j), c) <= r) best = std::max(best, f.at(i, j));
            }
        }
        CHECK(ball_sup(f, c, r) == best);
    }
}

TEST_CASE("signed extension continues a linear profile below its zero set") {
    const double h = 1.0 / 16;
    const auto lat = testing::square_lattice(h);
    const ScalarField f = make_field(lat, [h](double, double y) { return std::max(0.0, y - 0.5 * h); });
    const ScalarField g = signed_extension(f);
    const GridSpec& s = lat->spec();
    for (int i = 1; i + 1 < s.nx; ++i) {
        const int j0 = 16;  // y = 0
        CHECK(g.at(i, j0) == doctest::Approx(-0.5 * h));
        CHECK(g.at(i, j0 - 1) == 0.0);
        CHECK(g.at(i, j0 + 1) == f.at(i, j0 + 1));
    }
}
