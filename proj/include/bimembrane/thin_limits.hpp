#pragma once

#include <vector>

#include "bimembrane/grid.hpp"

namespace bimembrane {

/// Pair of membranes on the upper half-disk; the thin set is the node row y = 0.
struct MembranePair {
    ScalarField h;
    ScalarField w;
    double lambda_h = 0.5;
    double lambda_w = 0.5;
    int sweeps = 0;
    double residual = 0.0;
    bool converged = false;
};

struct ThinOptions {
    /// Stop when the largest nodal correction of a sweep is below tol.
    double tol = 1e-9;
    int max_sweeps = 400000;
    /// When false, hitting max_sweeps returns the iterate with converged = false.
    bool throw_on_cap = true;
    int threads = 0;
};

/// Half-disk of radius 1 on the node grid x in [-1, 1], y in [0, 1] with spacing h (1/h integer).
LatticePtr half_disk_lattice(double h);

/// Nodes updated by the solvers: interior nodes plus thin-row nodes whose E, W and N neighbours are masked.
bool thin_free(const Lattice& lat, int i, int j);
bool on_thin_row(const Lattice& lat, int j);

/// Minimizer of Lh int |grad h|^2 + Lw int |grad w|^2 with h >= w on the thin set.
/// Only curved-boundary values of the data fields are used.
MembranePair solve_two_membrane(const ScalarField& data_h, const ScalarField& data_w, double lambda_h,
                                double lambda_w, const ThinOptions& opts = {});

/// h = w on the thin set with Lh d_N h + Lw d_N w = 0 there.
MembranePair solve_transmission(const ScalarField& data_h, const ScalarField& data_w, double lambda_h,
                                double lambda_w, const ThinOptions& opts = {});

/// Harmonic in the half-disk with zero Neumann data on the thin set (ghost reflection).
ScalarField solve_neumann_harmonic(const ScalarField& data, const ThinOptions& opts = {});

/// w1 = r^(3/2) cos(3 theta / 2), w2 = 0, recombined into (h, w).
MembranePair reference_signorini_pair(double lambda_h, double lambda_w, LatticePtr lattice);

/// w1 = h - w, w2 = Lh h + Lw w.
std::pair<ScalarField, ScalarField> split_membranes(const MembranePair& pair);
/// Inverse of split_membranes: h = (w2 + Lw w1)/(Lh + Lw), w = (w2 - Lh w1)/(Lh + Lw).
MembranePair recombine_membranes(const ScalarField& w1, const ScalarField& w2, double lambda_h, double lambda_w);

/// Weighted Dirichlet energy; thin-row horizontal edges count half.
double membrane_energy(const MembranePair& pair);

struct ComplementarityRow {
    double x = 0.0;
    double gap = 0.0;   // h - w
    double dn_h = 0.0;  // discrete d_N h
    double dn_w = 0.0;
    /// |min(gap, -dn_h)| and |min(gap, dn_w)|.
    double res_h = 0.0;
    double res_w = 0.0;
    /// |Lh dn_h + Lw dn_w| (relevant on contact).
    double flux = 0.0;
};

struct ComplementarityAudit {
    std::vector<ComplementarityRow> rows;
    double max_residual = 0.0;
};

ComplementarityAudit complementarity_audit(const MembranePair& pair);

}  // namespace bimembrane
