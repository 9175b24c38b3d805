#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "bimembrane/energy.hpp"

namespace bimembrane {

/// Zero entries of delta_schedule / step0 mean "derive from h" ({8h, 4h, 2h} and h^2/8).
struct SolveOptions {
    std::vector<double> delta_schedule;
    double step0 = 0.0;
    int max_outer = 400;
    double tol_energy = 1e-9;
    double tol_step = 1e-6;
    int relax_sweeps = 50;
    std::uint64_t seed = 0;
    /// Amplitude of a uniform random perturbation of the initial interior values (0 = none).
    double init_noise = 0.0;
    SmoothingKind smoothing = SmoothingKind::Concave;
    /// Final phase-frozen harmonic relaxation on the corrected positivity sets.
    bool polish = true;
    /// 0 = sequential lexicographic sweeps; > 0 = red-black sweeps on that many threads.
    int threads = 0;

    /// Fills defaults for a grid of spacing h and validates.
    SolveOptions resolved(double h) const;
    void validate() const;
};

/// Dirichlet data; only the values at Boundary nodes of the lattice are used.
struct BoundaryData {
    ScalarField u0;
    ScalarField v0;

    static BoundaryData from_generators(LatticePtr lattice, const Generator& gu, const Generator& gv);
    /// Throws std::invalid_argument unless u0 >= v0 >= 0 at every boundary node.
    void validate() const;
};

struct TraceRow {
    int iter = 0;
    double delta = 0.0;
    double total_smoothed = 0.0;
    double total_sharp = 0.0;
};

struct SolveResult {
    FieldPair pair;
    std::vector<TraceRow> energy_trace;
    bool converged = false;
    int iterations = 0;
    /// Gradient steps where backtracking failed to find a decrease.
    int failed_line_searches = 0;
};

FieldPair solve_initial_pair(const BoundaryData& data, const Params& params, const SolveOptions& opts);

SolveResult solve(const BoundaryData& data, const Params& params, const SolveOptions& opts);

struct HarmonicOptions {
    double rel_tol = 1e-10;
    int max_sweeps = 50000;
    int threads = 0;
};

/// Discrete harmonic function with the values of `data` held fixed wherever `free` is 0.
/// Nodes with free = 1 must be interior nodes. `data` doubles as the initial guess.
ScalarField harmonic_solve(const ScalarField& data, std::span<const std::uint8_t> free,
                           const HarmonicOptions& opts = {});

/// Harmonic extension of the boundary-node values of `data` into all interior nodes.
ScalarField harmonic_extension(const ScalarField& data, const HarmonicOptions& opts = {});

/// Value, in units of delta, of the smoothed one-dimensional plane profile at the
/// sharp free boundary (about 0.1585 for the concave step), or at `inset` * delta / sqrt(Lambda)
/// inside it.
double boundary_level(SmoothingKind kind, double inset = 0.0);

/// Sum of the 5-point Laplacian times h^2 over interior nodes within B_r(center).
double laplacian_ball_mass(const ScalarField& f, Point center, double r);

}  // namespace bimembrane
