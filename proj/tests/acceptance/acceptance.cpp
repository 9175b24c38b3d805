// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <functional>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "bimembrane/energy.hpp"
#include "bimembrane/flatness.hpp"
#include "bimembrane/free_boundary.hpp"
#include "bimembrane/frequency.hpp"
#include "bimembrane/grid_io.hpp"
#include "bimembrane/presets.hpp"
#include "bimembrane/solver.hpp"
#include "bimembrane/thin_limits.hpp"

using namespace bimembrane;

namespace {

const Params kParams{0.7, 0.3};

struct Outcome {
    bool passed = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double x) {
    std::ostringstream os;
    os.precision(4);
    os << x;
    return os.str();
}

LatticePtr disk(double h) { return Lattice::make(GridSpec::centered_square(1.0, h), DomainSpec::disk(1.0)); }

struct Solved {
    FieldPair pair;
    double seconds = 0.0;
    bool converged = false;
};

/// Solves are expensive, so each (preset, h) is computed once and shared between criteria.
const Solved& solved(const std::string& preset, double h) {
    static std::map<std::pair<std::string, double>, Solved> cache;
    const auto key = std::make_pair(preset, h);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    const BoundaryData data = preset_boundary_data(preset, disk(h), kParams);
    const auto t0 = std::chrono::steady_clock::now();
    SolveResult r = solve(data, kParams, SolveOptions{});
    Solved s{std::move(r.pair), seconds_since(t0), r.converged};
    return cache.emplace(key, std::move(s)).first->second;
}

struct Analysis {
    BoundarySet boundary;
    std::optional<Point> center;
};

const Analysis& analysed(const std::string& preset, double h) {
    static std::map<std::pair<std::string, double>, Analysis> cache;
    const auto key = std::make_pair(preset, h);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    Analysis a;
    a.boundary = extract_boundaries(solved(preset, h).pair);
    // Center: nearest point of the u free boundary to the origin.
    double best = std::numeric_limits<double>::infinity();
    for (const Polyline& line : a.boundary.polyline_u) {
        for (std::size_t k = 0; k + 1 < line.vertices.size(); ++k) {
            const Point p = line.vertices[k];
            const Point ab = line.vertices[k + 1] - p;
            const double len2 = dot(ab, ab);
            const double t = len2 > 0.0 ? std::clamp(dot(Point{0.0, 0.0} - p, ab) / len2, 0.0, 1.0) : 0.0;
            const Point q = p + t * ab;
            if (norm(q) < best) {
                best = norm(q);
                a.center = q;
            }
        }
    }
    return cache.emplace(key, std::move(a)).first->second;
}

double reach(const FieldPair& pair, Point p) { return pair.lattice().domain().distance_to_boundary(p, pair.spec()); }

const FrequencyTrace& perturbed_frequency() {
    static std::optional<FrequencyTrace> trace;
    if (trace) return *trace;
    const double h = 1.0 / 256;
    const FieldPair& pair = solved("perturbed_plane", h).pair;
    const Analysis& a = analysed("perturbed_plane", h);
    if (!a.center) throw std::runtime_error("perturbed plane has no free boundary");
    const double r_hi = std::min(0.45, reach(pair, *a.center) - h);
    const double r_lo = std::max(0.02, 6.0 * h);
    std::vector<double> radii;
    for (double r = r_hi; r >= r_lo * (1.0 - 1e-12); r *= 0.85) radii.push_back(r);
    std::reverse(radii.begin(), radii.end());
    const Point nu = initial_flatness_normal(pair, *a.center, 5.0 * h);
    trace = frequency_trace(pair, *a.center, nu, radii, a.boundary);
    return *trace;
}

// ---------------------------------------------------------------- criteria

Outcome plane_recovery() {
    double err[2];
    double secs[2];
    int k = 0;
    for (double h : {1.0 / 64, 1.0 / 128}) {
        const Solved& s = solved("plane", h);
        const LatticePtr& lat = s.pair.lattice_ptr();
        const FieldPair exact = reference_plane_pair(kParams, {0.0, 1.0}, lat);
        err[k] = std::max(sup_distance(s.pair.u, exact.u), sup_distance(s.pair.v, exact.v));
        secs[k] = s.seconds;
        ++k;
    }
    const double ratio = err[0] / err[1];
    const bool ok = err[0] <= 0.05 && ratio >= 1.5 && secs[0] <= 120.0 && secs[1] <= 120.0;
    return {ok, "sup error " + fmt(err[0]) + " -> " + fmt(err[1]) + ", ratio " + fmt(ratio) + ", runtime " +
                    fmt(secs[0]) + " s / " + fmt(secs[1]) + " s"};
}

double max_residual(const std::string& preset, double h, std::optional<Phase> phase) {
    const FieldPair& pair = solved(preset, h).pair;
    double worst = 0.0;
    std::size_t used = 0;
    for (const FreeBoundarySample& s : analysed(preset, h).boundary.samples) {
        if (phase && s.phase != *phase) continue;
        if (!std::isfinite(s.residual) || reach(pair, s.location) < 8.0 * h) continue;
        worst = std::max(worst, s.residual);
        ++used;
    }
    if (used == 0) throw std::runtime_error(preset + ": no samples clear the boundary margin");
    return worst;
}

Outcome bernoulli() {
    const double h = 1.0 / 128;
    const double two = max_residual("plane", h, Phase::TwoPhase);
    const double one = max_residual("one_phase", h, Phase::OnePhaseU);
    return {two <= 0.05 && one <= 0.05, "plane two-phase " + fmt(two) + ", one-phase " + fmt(one)};
}

Outcome proportionality() {
    const double target = std::sqrt(kParams.lambda_u / kParams.lambda_v);
    double c_err = 0.0;
    double res = 0.0;
    std::size_t fits = 0;
    for (auto [preset, h] : {std::pair{"plane", 1.0 / 128}, std::pair{"perturbed_plane", 1.0 / 256}}) {
        const FieldPair& pair = solved(preset, h).pair;
        for (const FreeBoundarySample& s : analysed(preset, h).boundary.samples) {
            if (s.phase != Phase::TwoPhase || reach(pair, s.location) < 0.1 + 8.0 * h) continue;
            const ProportionalityFit fit = proportionality_fit(pair, s.location, 0.1);
            c_err = std::max(c_err, std::abs(fit.c / target - 1.0));
            res = std::max(res, fit.rel_residual);
            ++fits;
        }
    }
    return {fits > 0 && c_err <= 0.1 && res <= 0.1, std::to_string(fits) + " samples, max |c/" + fmt(target) +
                                                         " - 1| " + fmt(c_err) + ", max residual " + fmt(res)};
}

Outcome nondegeneracy() {
    double worst = std::numeric_limits<double>::infinity();
    std::size_t rows = 0;
    for (auto [preset, h] : {std::pair{"plane", 1.0 / 128}, std::pair{"one_phase", 1.0 / 128},
                             std::pair{"perturbed_plane", 1.0 / 256}}) {
        const NondegeneracyTable t = nondegeneracy_scan(solved(preset, h).pair, analysed(preset, h).boundary, {0.1, 0.2});
        worst = std::min(worst, t.min_ratio);
        rows += t.rows.size();
    }
    return {rows > 0 && worst >= 0.1, std::to_string(rows) + " rows, min sup-ratio " + fmt(worst)};
}

Outcome frequency_calibration() {
    const double h = 1.0 / 128;
    const auto t0 = std::chrono::steady_clock::now();
    const LatticePtr lat = disk(h);
    FrequencyOptions o;
    o.half_plane_phases = true;
    std::vector<double> radii;
    for (double r = 0.4; r >= 10.0 * h * (1.0 - 1e-12); r *= 0.85) radii.push_back(r);
    std::reverse(radii.begin(), radii.end());
    double dev = 0.0;
    for (double lambda : {1.0, 1.5, 2.0}) {
        const FieldPair pair = planted_profile_pair(kParams, lat, lambda, planted_amplitude(lambda, 10.0 * h, o.sigma));
        const FrequencyTrace t = frequency_trace(pair, {0.0, 0.0}, {0.0, 1.0}, radii, {}, o);
        for (const FrequencyRow& r : t.rows) dev = std::max(dev, std::abs(r.Ntilde - lambda));
    }
    const double secs = seconds_since(t0);
    return {dev <= 0.05 && secs <= 30.0,
            "max |N - lambda| " + fmt(dev) + " over " + std::to_string(radii.size()) + " radii, " + fmt(secs) + " s"};
}

Outcome sharp_regularity() {
    const double h = 1.0 / 256;
    const FrequencyTrace& t = perturbed_frequency();
    const double floor = 10.0 * h;
    const double nmin = untruncated_frequency_min(t, floor);
    const CubicHeightReport cubic = cubic_height_check(t, floor, 2.7, true);
    std::size_t truncated = 0;
    for (const FrequencyRow& r : t.rows) truncated += r.truncated ? 1 : 0;
    return {std::isfinite(nmin) && nmin >= 1.4 && cubic.passed,
            "min untruncated (r/2) dH/H " + fmt(nmin) + ", log-log slope " + fmt(cubic.slope) + " (" +
                std::to_string(truncated) + "/" + std::to_string(t.rows.size()) + " rows truncated)"};
}

Outcome almost_monotonicity() {
    const double baseline = 1e-3;
    const double C = monotonicity_report(perturbed_frequency()).C;
    const bool ok = std::isfinite(C) && C <= 2.0 * baseline && C >= 0.5 * baseline;
    return {ok, "C " + fmt(C) + ", baseline " + fmt(baseline)};
}

double sampled_distance(const ScalarField& coarse, const ScalarField& fine) {
    const GridSpec& s = coarse.spec();
    double e = 0.0;
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            if (!coarse.lattice().masked(i, j)) continue;
            if (const auto v = fine.sample(s.node(i, j))) e = std::max(e, std::abs(coarse.at(i, j) - *v));
        }
    }
    return e;
}

Outcome linearized_limits() {
    std::vector<double> errors;
    double audit = 0.0;
    double homogeneity = 0.0;
    for (int n : {32, 64, 128}) {
        const LatticePtr lat = half_disk_lattice(1.0 / n);
        const MembraneProblem prob = preset_membrane_problem("signorini", lat, 0.7, 0.3);
        const MembranePair sol = solve_two_membrane(prob.data_h, prob.data_w, 0.7, 0.3);
        const MembranePair ref = reference_signorini_pair(0.7, 0.3, lat);
        errors.push_back(std::max(sup_distance(sol.h, ref.h), sup_distance(sol.w, ref.w)));
        audit = std::max(audit, complementarity_audit(sol).max_residual);
        if (n == 128) {
            const auto [w1, w2] = split_membranes(sol);
            homogeneity = estimate_homogeneity(w1, {0.0, 0.0}, {0.1, 0.15, 0.2, 0.25, 0.3}).extrapolated;
        }
    }
    const bool monotone = errors[1] < errors[0] && errors[2] < errors[1];

    std::vector<MembranePair> levels;
    const std::vector<int> ns{16, 32, 64, 128};
    for (int n : ns) {
        const MembraneProblem prob = preset_membrane_problem("transmission_mixed", half_disk_lattice(1.0 / n), 0.7, 0.3);
        levels.push_back(solve_transmission(prob.data_h, prob.data_w, 0.7, 0.3));
    }
    std::vector<double> self;
    for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
        self.push_back(std::max(sampled_distance(levels[k].h, levels[k + 1].h),
                                sampled_distance(levels[k].w, levels[k + 1].w)));
    }
    double rate = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k < self.size(); ++k) rate = std::min(rate, std::log2(self[k - 1] / self[k]));

    const bool ok = monotone && audit <= 1e-6 && std::abs(homogeneity - 1.5) <= 0.05 && rate >= 1.8;
    return {ok, "signorini errors " + fmt(errors[0]) + ", " + fmt(errors[1]) + ", " + fmt(errors[2]) + "; audit " +
                    fmt(audit) + "; homogeneity " + fmt(homogeneity) + "; transmission rate " + fmt(rate)};
}

Outcome flatness_decay() {
    const double h = 1.0 / 256;
    const FieldPair& pair = solved("perturbed_plane", h).pair;
    const Analysis& a = analysed("perturbed_plane", h);
    if (!a.center) throw std::runtime_error("perturbed plane has no free boundary");
    std::vector<double> radii;
    for (double r = std::min(0.4, reach(pair, *a.center)); r > 2.0 * h; r *= 0.7) radii.push_back(r);
    const FlatnessTrace t = flatness_decay_trace(pair, *a.center, radii);
    std::size_t above = 0;
    for (bool f : t.floor_flags) above += f ? 0 : 1;
    const bool ok = !std::isnan(t.max_ratio_above_floor) && t.max_ratio_above_floor <= 1.0 && t.drift_constant <= 5.0;
    return {ok, std::to_string(above) + " radii above the floor, max ratio " + fmt(t.max_ratio_above_floor) +
                    ", drift constant " + fmt(t.drift_constant)};
}

Outcome oracle_suites() {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> wide(-2.0, 2.0);
    double cone = 0.0;
    for (int t = 0; t < 100000; ++t) {
        const double a = wide(rng);
        const double b = wide(rng);
        const auto p = project_cone(a, b);
        const auto q = oracles::dense_cone_projection(a, b);
        cone = std::max({cone, std::abs(p.first - q.first), std::abs(p.second - q.second)});
    }

    const LatticePtr lat = disk(1.0 / 16);
    const SmoothingSpec sm{0.1, SmoothingKind::Concave};
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    double fd_rel = 0.0;
    for (int t = 0; t < 100; ++t) {
        FieldPair pair{ScalarField(lat, 0.0), ScalarField(lat, 0.0), kParams};
        FieldPair dir = pair;
        for (std::size_t k = 0; k < lat->spec().size(); ++k) {
            if (!lat->masked(k)) continue;
            pair.v[k] = 0.3 * unit(rng);
            pair.u[k] = pair.v[k] + 0.3 * unit(rng);
            if (lat->kind(k) == NodeKind::Interior) {
                dir.u[k] = 2.0 * unit(rng) - 1.0;
                dir.v[k] = 2.0 * unit(rng) - 1.0;
            }
        }
        const double analytic = pair_inner(first_variation(pair, sm), {dir.u, dir.v});
        const double fd = oracles::fd_directional(pair, dir, sm, 1e-7);
        fd_rel = std::max(fd_rel, std::abs(analytic - fd) / std::abs(fd));
    }

    ScalarField f(lat, 0.0);
    for (std::size_t k = 0; k < lat->spec().size(); ++k) {
        if (lat->masked(k)) f[k] = (2.0 * unit(rng) - 1.0) * std::pow(10.0, 60.0 * unit(rng) - 30.0);
    }
    std::stringstream ss;
    write_grid(ss, f);
    const ScalarField g = read_grid(ss);
    const bool exact = g.spec() == f.spec() &&
                       std::memcmp(g.values().data(), f.values().data(), f.values().size_bytes()) == 0;

    return {cone <= 1e-6 && fd_rel <= 1e-3 && exact, "cone max deviation " + fmt(cone) + ", first variation rel " +
                                                         fmt(fd_rel) + ", round trip " +
                                                         (exact ? "bit-exact" : "differs")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"plane recovery", plane_recovery},
        {"bernoulli conditions", bernoulli},
        {"blow-up proportionality", proportionality},
        {"non-degeneracy", nondegeneracy},
        {"frequency calibration", frequency_calibration},
        {"sharp-regularity surrogate", sharp_regularity},
        {"almost-monotonicity", almost_monotonicity},
        {"linearized limits", linearized_limits},
        {"flatness decay", flatness_decay},
        {"oracle suites", oracle_suites},
    };
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += o.passed ? 0 : 1;
        std::cout << "criterion " << k + 1 << " (" << criteria[k].first << "): " << (o.passed ? "PASS" : "FAIL")
                  << "  " << o.detail << std::endl;
    }
    std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << "\n";
    return failures == 0 ? 0 : 1;
}
