#include "bimembrane/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <sstream>

#ifdef BIMEMBRANE_HAVE_OPENMP
#include <omp.h>
#endif

namespace bimembrane {

SolveOptions SolveOptions::resolved(double h) const {
    SolveOptions o = *this;
    if (o.delta_schedule.empty()) o.delta_schedule = {8.0 * h, 4.0 * h, 2.0 * h};
    if (o.step0 == 0.0) o.step0 = h * h / 8.0;
    o.validate();
    return o;
}

void SolveOptions::validate() const {
    if (delta_schedule.empty()) throw std::invalid_argument("solve.delta_schedule must not be empty");
    for (std::size_t i = 0; i < delta_schedule.size(); ++i) {
        if (!(delta_schedule[i] > 0.0)) throw std::invalid_argument("solve.delta_schedule entries must be positive");
        if (i && !(delta_schedule[i] < delta_schedule[i - 1])) {
            throw std::invalid_argument("solve.delta_schedule must be strictly decreasing");
        }
    }
    // Last width must clear twice the sharp threshold for unit-size data.
    if (delta_schedule.back() < 2e-8) throw std::invalid_argument("solve.delta_schedule last entry below 2*tau");
    if (!(step0 > 0.0)) throw std::invalid_argument("solve.step0 must be positive");
    if (max_outer < 1) throw std::invalid_argument("solve.max_outer must be >= 1");
    if (!(tol_energy > 0.0)) throw std::invalid_argument("solve.tol_energy must be positive");
    if (!(tol_step > 0.0)) throw std::invalid_argument("solve.tol_step must be positive");
    if (relax_sweeps < 0) throw std::invalid_argument("solve.relax_sweeps must be >= 0");
    if (init_noise < 0.0) throw std::invalid_argument("solve.init_noise must be >= 0");
    if (threads < 0) throw std::invalid_argument("threads must be >= 0");
}

BoundaryData BoundaryData::from_generators(LatticePtr lattice, const Generator& gu, const Generator& gv) {
    return {make_field(lattice, gu), make_field(std::move(lattice), gv)};
}

void BoundaryData::validate() const {
    if (!(u0.spec() == v0.spec())) throw std::invalid_argument("boundary data: u0 and v0 grids differ");
    const Lattice& lat = u0.lattice();
    for (std::size_t k = 0; k < lat.spec().size(); ++k) {
        if (lat.kind(k) != NodeKind::Boundary) continue;
        if (!(u0[k] >= v0[k] && v0[k] >= 0.0)) {
            std::ostringstream os;
            os << "boundary data infeasible at node " << k << ": need u0 >= v0 >= 0";
            throw std::invalid_argument(os.str());
        }
    }
}

namespace {

double sor_omega(const GridSpec& s) {
    const int cells = std::max(s.nx, s.ny) - 1;
    return 2.0 / (1.0 + std::sin(M_PI / cells));
}

template <class Body>
void sweep_nodes(const GridSpec& s, int threads, Body&& body) {
    if (threads <= 0) {
        for (int j = 1; j + 1 < s.ny; ++j) {
            for (int i = 1; i + 1 < s.nx; ++i) body(i, j);
        }
        return;
    }
    for (int color = 0; color < 2; ++color) {
#ifdef BIMEMBRANE_HAVE_OPENMP
#pragma omp parallel for num_threads(threads) schedule(static)
#endif
        for (int j = 1; j < s.ny - 1; ++j) {
            for (int i = 1 + ((j + 1 + color) & 1); i < s.nx - 1; i += 2) body(i, j);
        }
    }
}

}  // namespace

ScalarField harmonic_solve(const ScalarField& data, std::span<const std::uint8_t> free, const HarmonicOptions& opts) {
    const Lattice& lat = data.lattice();
    const GridSpec& s = lat.spec();
    if (free.size() != s.size()) throw std::invalid_argument("harmonic_solve: free mask size mismatch");
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (free[k] && lat.kind(k) != NodeKind::Interior) {
            throw std::invalid_argument("harmonic_solve: free node is not an interior node");
        }
    }
    ScalarField f = data;
    const double tol = opts.rel_tol * data.sup_norm();
    const double omega = sor_omega(s);
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double residual = 0.0;
        sweep_nodes(s, opts.threads, [&](int i, int j) {
            const std::size_t k = s.index(i, j);
            if (!free[k]) return;
            const double avg = 0.25 * (f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1));
            const double r = avg - f[k];
            f[k] += omega * r;
            // Race on the max in red-black mode only affects the stopping test, not the values.
            residual = std::max(residual, std::abs(r));
        });
        if (residual <= tol) {
            // Confirm with a clean residual pass (the in-sweep value lags by one update).
            double check = 0.0;
            for (int j = 1; j + 1 < s.ny; ++j) {
                for (int i = 1; i + 1 < s.nx; ++i) {
                    const std::size_t k = s.index(i, j);
                    if (!free[k]) continue;
                    const double avg = 0.25 * (f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1));
                    check = std::max(check, std::abs(avg - f[k]));
                }
            }
            if (check <= tol) return f;
        }
    }
    throw std::runtime_error("harmonic_solve: no convergence within iteration cap");
}

ScalarField harmonic_extension(const ScalarField& data, const HarmonicOptions& opts) {
    const Lattice& lat = data.lattice();
    std::vector<std::uint8_t> free(lat.spec().size(), 0);
    for (std::size_t k = 0; k < free.size(); ++k) free[k] = lat.kind(k) == NodeKind::Interior ? 1 : 0;
    return harmonic_solve(data, free, opts);
}

double boundary_level(SmoothingKind kind, double inset) {
    const SmoothingSpec sm{1.0, kind};
    // Distance (in delta / sqrt(Lambda) units) between the level theta and the
    // plane extrapolated from the far field; the sharp boundary is where it equals 1.
    const double target = std::max(1.0 - inset, 1e-3);
    auto gap = [&](double theta) {
        const int n = 4000;
        const double w = (1.0 - theta) / n;
        double acc = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double s = theta + k * w;
            const double st = std::max(sm.step(s), 1e-300);
            const double c = (k == 0 || k == n) ? 1.0 : (k % 2 ? 4.0 : 2.0);
            acc += c / std::sqrt(st);
        }
        return acc * w / 3.0;
    };
    double lo = 1e-6;
    double hi = 1.0;
    for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (gap(mid) > target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

double laplacian_ball_mass(const ScalarField& f, Point center, double r) {
    const Lattice& lat = f.lattice();
    const GridSpec& s = lat.spec();
    double acc = 0.0;
    for (int j = 1; j + 1 < s.ny; ++j) {
        for (int i = 1; i + 1 < s.nx; ++i) {
            if (!lat.interior(i, j) || distance(s.node(i, j), center) > r) continue;
            acc += f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1) - 4.0 * f.at(i, j);
        }
    }
    return acc;
}

namespace {

struct NodeProblem {
    double n;        // number of neighbours
    double sum;      // sum of neighbour values
    double weight;   // Lambda h^2
    const SmoothingSpec* sm;

    double phi(double x) const { return n * x * x - 2.0 * x * sum + weight * sm->step(x); }
};

/// Global minimizer of the node energy on [lo, hi] (hi may be +inf).
double minimize_node(const NodeProblem& p, double lo, double hi) {
    const double delta = p.sm->delta;
    double cand[8];
    int nc = 0;
    auto push = [&](double x) { cand[nc++] = std::clamp(x, lo, hi); };
    push(lo);
    if (std::isfinite(hi)) push(hi);
    push(std::max(p.sum / p.n, delta));
    push(delta);
    // Stationary points inside (0, delta).
    const double a2 = p.weight / (delta * delta);
    if (p.sm->kind == SmoothingKind::Concave) {
        const double den = p.n - a2;
        if (den > 0.0) push(std::clamp((p.sum - p.weight / delta) / den, 0.0, delta));
    } else {
        // 2n x - 2 sum + 6 w (x/delta^2)(1 - x/delta) = 0
        const double qa = -6.0 * p.weight / (delta * delta * delta);
        const double qb = 2.0 * p.n + 6.0 * a2;
        const double qc = -2.0 * p.sum;
        const double disc = qb * qb - 4.0 * qa * qc;
        if (disc >= 0.0) {
            const double sq = std::sqrt(disc);
            push(std::clamp((-qb + sq) / (2.0 * qa), 0.0, delta));
            push(std::clamp((-qb - sq) / (2.0 * qa), 0.0, delta));
        }
    }
    double best = cand[0];
    double best_phi = p.phi(best);
    for (int c = 1; c < nc; ++c) {
        const double val = p.phi(cand[c]);
        if (val < best_phi) {
            best_phi = val;
            best = cand[c];
        }
    }
    return best;
}

/// One energy-monotone nonlinear SOR sweep over the interior nodes of one field.
/// `lower` / `upper` hold the ordering bounds (the other field), nullptr = none.
void relax_field(ScalarField& f, const ScalarField* lower, const ScalarField* upper, double lambda,
                 const SmoothingSpec& sm, double omega, int threads) {
    const Lattice& lat = f.lattice();
    const GridSpec& s = lat.spec();
    const double weight = lambda * s.h * s.h;
    sweep_nodes(s, threads, [&](int i, int j) {
        const std::size_t k = s.index(i, j);
        if (lat.kind(k) != NodeKind::Interior) return;
        const NodeProblem p{4.0, f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1), weight, &sm};
        const double lo = lower ? (*lower)[k] : 0.0;
        const double hi = upper ? (*upper)[k] : std::numeric_limits<double>::infinity();
        const double x0 = f[k];
        const double star = minimize_node(p, lo, hi);
        const double over = std::clamp(x0 + omega * (star - x0), lo, hi);
        f[k] = p.phi(over) <= p.phi(x0) ? over : star;
    });
}

void apply_boundary(FieldPair& pair, const BoundaryData& data) {
    const Lattice& lat = pair.lattice();
    for (std::size_t k = 0; k < lat.spec().size(); ++k) {
        if (lat.kind(k) != NodeKind::Boundary) continue;
        pair.u[k] = data.u0[k];
        pair.v[k] = data.v0[k];
    }
}

double sup_change(const FieldPair& a, const FieldPair& b) {
    return std::max(sup_distance(a.u, b.u), sup_distance(a.v, b.v));
}

TraceRow make_row(int iter, double delta, const FieldPair& pair, const SmoothingSpec& sm) {
    const EnergyReport r = energy(pair, sm);
    return {iter, delta, r.total_smoothed, r.total_sharp};
}

/// Projected gradient step with Armijo backtracking. Returns false when no decrease was found.
bool gradient_step(FieldPair& pair, const SmoothingSpec& sm, double& step) {
    const auto g = first_variation(pair, sm);
    const double e0 = smoothed_energy(pair, sm);
    const Lattice& lat = pair.lattice();
    const double h2 = lat.h() * lat.h();
    for (int attempt = 0; attempt < 30; ++attempt) {
        FieldPair trial = pair;
        for (std::size_t k = 0; k < lat.spec().size(); ++k) {
            if (lat.kind(k) != NodeKind::Interior) continue;
            trial.u[k] -= step * g.first[k];
            trial.v[k] -= step * g.second[k];
        }
        project_pair_inplace(trial);
        double descent = 0.0;  // <grad F, trial - pair>
        for (std::size_t k = 0; k < lat.spec().size(); ++k) {
            if (lat.kind(k) != NodeKind::Interior) continue;
            descent += g.first[k] * (trial.u[k] - pair.u[k]) + g.second[k] * (trial.v[k] - pair.v[k]);
        }
        descent *= h2;
        const double e1 = smoothed_energy(trial, sm);
        if (e1 <= e0 + 1e-4 * descent && e1 <= e0 + 1e-12 * std::abs(e0)) {
            pair = std::move(trial);
            if (attempt == 0) step *= 1.5;
            return true;
        }
        step *= 0.5;
    }
    return false;
}

/// Depth below the sharp boundary, in units of delta / sqrt(Lambda), of a point where the
/// one-dimensional smoothed profile takes the value theta * delta (negative outside).
double profile_depth(SmoothingKind kind, double theta) {
    if (theta >= 1.0) return theta;
    if (kind == SmoothingKind::Concave) return 1.0 - std::asin(1.0 - theta);
    const double r3 = std::sqrt(3.0);
    const double q = std::sqrt(3.0 - 2.0 * theta);
    return 1.0 - (std::log((r3 + q) / (r3 - q)) - std::log((r3 + 1.0) / (r3 - 1.0))) / r3;
}

/// Harmonic relaxation of one phase whose zero set is moved to the sharp boundary implied by
/// the smoothed values: Shortley-Weller arms end where the depth field crosses zero.
ScalarField polish_phase(const ScalarField& f, double lambda, const SmoothingSpec& sm, const HarmonicOptions& opts) {
    const Lattice& lat = f.lattice();
    const GridSpec& s = lat.spec();
    const double unit = sm.delta / std::sqrt(lambda);
    const double none = -std::numeric_limits<double>::infinity();
    std::vector<double> depth(s.size(), none);
    for (std::size_t k = 0; k < s.size(); ++k) {
        if (lat.masked(k) && f[k] > 0.0) depth[k] = unit * profile_depth(sm.kind, f[k] / sm.delta);
    }

    struct Row {
        std::size_t k;
        std::array<std::size_t, 4> nb;
        std::array<double, 4> c;  // 0 for arms that end on the free boundary
        double diag;
    };
    std::array<std::vector<Row>, 2> rows;
    ScalarField out = f;
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    for (int j = 1; j + 1 < s.ny; ++j) {
        for (int i = 1; i + 1 < s.nx; ++i) {
            const std::size_t k = s.index(i, j);
            if (lat.kind(k) != NodeKind::Interior) continue;
            if (!(depth[k] > 0.0)) {
                out[k] = 0.0;
                continue;
            }
            Row row{k, {}, {}, 0.0};
            std::array<double, 4> arm{};
            std::array<bool, 4> cut{};
            for (int d = 0; d < 4; ++d) {
                const std::size_t q = s.index(i + di[d], j + dj[d]);
                row.nb[d] = q;
                arm[d] = 1.0;
                if (lat.kind(q) == NodeKind::Boundary || depth[q] > 0.0) continue;
                cut[d] = true;
                double t = 1.0;
                if (depth[q] > none) {
                    t = depth[k] / (depth[k] - depth[q]);
                } else {
                    const int oi = i - di[d];
                    const int oj = j - dj[d];
                    if (lat.masked(oi, oj) && depth[s.index(oi, oj)] > depth[k]) {
                        t = depth[k] / (depth[s.index(oi, oj)] - depth[k]);
                    }
                }
                arm[d] = std::clamp(t, 1e-3, 1.0);
            }
            for (int axis = 0; axis < 2; ++axis) {
                const double a = arm[2 * axis];
                const double b = arm[2 * axis + 1];
                row.c[2 * axis] = cut[2 * axis] ? 0.0 : 2.0 / (a * (a + b));
                row.c[2 * axis + 1] = cut[2 * axis + 1] ? 0.0 : 2.0 / (b * (a + b));
                row.diag += 2.0 / (a * b);
            }
            rows[opts.threads > 0 ? (i + j) & 1 : 0].push_back(row);
        }
    }

    const ScalarField start = out;
    const double tol = opts.rel_tol * std::max(f.sup_norm(), std::numeric_limits<double>::min());
    double omega = sor_omega(s);
    double first = -1.0;
    for (int sweep = 0; sweep < opts.max_sweeps; ++sweep) {
        double residual = 0.0;
        for (const auto& color : rows) {
            const long n = static_cast<long>(color.size());
#ifdef BIMEMBRANE_HAVE_OPENMP
#pragma omp parallel for num_threads(opts.threads > 0 ? opts.threads : 1) schedule(static) reduction(max : residual)
#endif
            for (long m = 0; m < n; ++m) {
                const Row& row = color[m];
                double acc = 0.0;
                for (int d = 0; d < 4; ++d) acc += row.c[d] * out[row.nb[d]];
                const double r = acc / row.diag - out[row.k];
                out[row.k] += omega * r;
                residual = std::max(residual, std::abs(r));
            }
        }
        if (first < 0.0) first = residual;
        if (residual <= tol) return out;
        // Over-relaxation is not guaranteed for the non-symmetric stencil; fall back to Gauss-Seidel.
        if (omega > 1.0 && residual > 1e3 * first) {
            omega = 1.0;
            out = start;
        }
    }
    throw std::runtime_error("polish: no convergence within iteration cap");
}

}  // namespace

FieldPair solve_initial_pair(const BoundaryData& data, const Params& params, const SolveOptions& opts) {
    HarmonicOptions ho;
    ho.threads = opts.threads;
    FieldPair pair{harmonic_extension(data.u0, ho), harmonic_extension(data.v0, ho), params};
    if (opts.init_noise > 0.0) {
        std::mt19937_64 rng(opts.seed);
        std::uniform_real_distribution<double> dist(-opts.init_noise, opts.init_noise);
        const Lattice& lat = pair.lattice();
        for (std::size_t k = 0; k < lat.spec().size(); ++k) {
            if (lat.kind(k) != NodeKind::Interior) continue;
            pair.u[k] += dist(rng);
            pair.v[k] += dist(rng);
        }
    }
    project_pair_inplace(pair);
    return pair;
}

SolveResult solve(const BoundaryData& data, const Params& params, const SolveOptions& options) {
    params.validate(true);
    data.validate();
    const Lattice& lat = data.u0.lattice();
    if (lat.interior_count() == 0) throw std::invalid_argument("solve: lattice has no interior node");
    const SolveOptions opts = options.resolved(lat.h());

    SolveResult result{solve_initial_pair(data, params, opts), {}, false, 0, 0};
    FieldPair& pair = result.pair;
    apply_boundary(pair, data);
    const double omega = sor_omega(lat.spec());
    double step = opts.step0;
    int iter = 0;
    bool stage_converged = false;

    for (double delta : opts.delta_schedule) {
        const SmoothingSpec sm{delta, opts.smoothing};
        result.energy_trace.push_back(make_row(iter, delta, pair, sm));
        double e_prev = result.energy_trace.back().total_smoothed;
        stage_converged = false;
        for (int outer = 0; outer < opts.max_outer; ++outer) {
            const FieldPair before = pair;
            if (!gradient_step(pair, sm, step)) {
                ++result.failed_line_searches;
                step = opts.step0;
            }
            for (int sweep = 0; sweep < opts.relax_sweeps; ++sweep) {
                relax_field(pair.u, &pair.v, nullptr, params.lambda_u, sm.for_phase(params.lambda_u), omega, opts.threads);
                relax_field(pair.v, nullptr, &pair.u, params.lambda_v, sm.for_phase(params.lambda_v), omega, opts.threads);
            }
            ++iter;
            result.energy_trace.push_back(make_row(iter, delta, pair, sm));
            const double e = result.energy_trace.back().total_smoothed;
            const double scale = std::max({1.0, std::abs(e), std::abs(e_prev)});
            const double change = sup_change(before, pair) / std::max(1.0, pair.u.sup_norm());
            const double decrease = e_prev - e;
            e_prev = e;
            if (std::abs(decrease) <= opts.tol_energy * scale && change <= opts.tol_step) {
                stage_converged = true;
                break;
            }
        }
    }

    if (opts.polish) {
        // Move each zero set to the sharp boundary implied by the smoothed profile and
        // relax the phases harmonically up to it.
        const SmoothingSpec last{opts.delta_schedule.back(), opts.smoothing};
        HarmonicOptions ho;
        ho.threads = opts.threads;
        pair.u = polish_phase(pair.u, params.lambda_u, last.for_phase(params.lambda_u), ho);
        pair.v = polish_phase(pair.v, params.lambda_v, last.for_phase(params.lambda_v), ho);
        project_pair_inplace(pair);
        result.energy_trace.push_back(
            make_row(iter, 0.0, pair, SmoothingSpec{opts.delta_schedule.back(), opts.smoothing}));
    }
    result.converged = stage_converged;
    result.iterations = iter;
    return result;
}

}  // namespace bimembrane
