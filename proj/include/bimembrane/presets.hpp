#pragma once

#include <string>
#include <vector>

#include "bimembrane/solver.hpp"
#include "bimembrane/thin_limits.hpp"

namespace bimembrane {

enum class PresetFamily {
    /// Dirichlet data for the free-boundary solver.
    BoundaryValue,
    /// Analytic fields sampled directly (no solve).
    Planted,
    /// Data for the thin-limit solvers on the half disk.
    Membrane,
};

std::string to_string(PresetFamily family);

struct PresetInfo {
    std::string name;
    PresetFamily family = PresetFamily::BoundaryValue;
    std::string summary;
};

const std::vector<PresetInfo>& preset_catalog();

/// Throws std::invalid_argument for unknown names.
const PresetInfo& find_preset(const std::string& name);

/// Tunable parameters; NaN means the preset's own default.
struct PresetParams {
    /// perturbed_plane: a in (y + a (y^2 - x^2))^+; planted_*: a in x_N + a r^lambda cos(lambda theta).
    double amplitude = std::numeric_limits<double>::quiet_NaN();
    /// Angle of the plane normal for plane and one_phase.
    double normal_angle = M_PI / 2.0;
};

/// Default amplitude of the perturbed plane (keeps eps(0.4) below 0.1 around the origin).
constexpr double kPerturbedPlaneAmplitude = 0.3;

BoundaryData preset_boundary_data(const std::string& name, LatticePtr lattice, const Params& params,
                                  const PresetParams& pp = {});

/// Homogeneity of a planted preset (planted_1.5 -> 1.5).
double planted_lambda(const std::string& name);

/// Planted fields; the default amplitude keeps radii >= 10h above the r^3.1 truncation.
FieldPair preset_planted_pair(const std::string& name, LatticePtr lattice, const Params& params,
                              const PresetParams& pp = {});

struct MembraneProblem {
    ScalarField data_h;
    ScalarField data_w;
    bool transmission = false;
    /// signorini: the recombined reference pair is the exact discrete-limit target.
    bool has_reference = false;
};

/// Data on a half_disk_lattice for the membrane presets.
MembraneProblem preset_membrane_problem(const std::string& name, LatticePtr lattice, double lambda_h,
                                        double lambda_w);

}  // namespace bimembrane
