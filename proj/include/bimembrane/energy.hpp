#pragma once

#include <cmath>
#include <utility>

#include "bimembrane/pair.hpp"

namespace bimembrane {

enum class SmoothingKind {
    /// S(t) = 1 - (1 - t/delta)^2 on [0, delta]: compact support, S'(0+) = 2/delta.
    Concave,
    /// S(t) = 3 (t/delta)^2 - 2 (t/delta)^3: C^1 smoothstep.
    Cubic,
};

struct SmoothingSpec {
    double delta = 1.0;
    SmoothingKind kind = SmoothingKind::Concave;

    void validate() const;
    double step(double t) const;
    double slope(double t) const;
    /// Width actually applied to a phase with weight lambda: delta * sqrt(2 lambda). Both
    /// transition layers then have the same thickness in space (about delta / sqrt(1/2)),
    /// so proportional phases get proportional smoothed profiles.
    SmoothingSpec for_phase(double lambda) const { return {delta * std::sqrt(2.0 * lambda), kind}; }
};

std::string to_string(SmoothingKind kind);
SmoothingKind smoothing_kind_from_string(const std::string& s);

/// measure_u / measure_v hold the sharp, Lambda-weighted measures; the smoothed
/// ones enter only total_smoothed.
struct EnergyReport {
    double dirichlet_u = 0.0;
    double dirichlet_v = 0.0;
    double measure_u = 0.0;
    double measure_v = 0.0;
    double measure_u_smoothed = 0.0;
    double measure_v_smoothed = 0.0;
    double total_smoothed = 0.0;
    double total_sharp = 0.0;
};

/// Discrete Dirichlet integral: sum over lattice edges with both ends masked of (f_a - f_b)^2.
double dirichlet_energy(const ScalarField& f);

EnergyReport energy(const FieldPair& pair, const SmoothingSpec& smoothing);

/// Smoothed total only (the optimizer's objective); cheaper than energy().
double smoothed_energy(const FieldPair& pair, const SmoothingSpec& smoothing);

/// L^2 gradient of the smoothed energy: (-2 Lap u + Lu S'(u), -2 Lap v + Lv S'(v)) at
/// interior nodes, zero at boundary (Dirichlet) nodes. With the h^2-weighted inner
/// product this is the exact derivative of smoothed_energy.
std::pair<ScalarField, ScalarField> first_variation(const FieldPair& pair, const SmoothingSpec& smoothing);

/// h^2-weighted inner product of two pairs of fields on the same lattice.
double pair_inner(const std::pair<ScalarField, ScalarField>& a, const std::pair<ScalarField, ScalarField>& b);

/// Euclidean projection of (a, b) onto {a >= b >= 0}.
std::pair<double, double> project_cone(double a, double b);

FieldPair project_pair(const FieldPair& pair);
void project_pair_inplace(FieldPair& pair);

}  // namespace bimembrane
