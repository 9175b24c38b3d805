#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "bimembrane/free_boundary.hpp"
#include "bimembrane/frequency.hpp"
#include "bimembrane/presets.hpp"
#include "bimembrane/solver.hpp"

namespace bimembrane::cli {

using Json = nlohmann::ordered_json;

/// Invalid configuration; `path` is the dotted key that failed (exit code 2).
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string path, const std::string& message)
        : std::runtime_error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

/// Unreadable input or unwritable output (exit code 3).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every accepted key with its default; anything else in a config is rejected.
Json default_config();

/// Keys a named preset changes relative to default_config().
Json preset_overlay(const std::string& name);

struct ConfigSources {
    std::optional<std::string> path;
    std::optional<std::string> preset;
    std::vector<std::string> sets;
    std::optional<std::string> out;
    std::optional<int> threads;
};

/// defaults <- preset <- file <- --set <- flags, with strict key and type checks.
Json resolve_config(const ConfigSources& sources);

struct FrequencyConfig {
    bool enabled = true;
    FrequencyOptions options;
    double r_min = 0.02;
    double r_min_cells = 6.0;
    double r_max = 0.45;
    double ratio = 0.85;
    double floor_cells = 10.0;
    double lower_bound_tol = 0.1;
    double log_derivative_min = 1.4;
    double slope_min = 2.7;
    double mismatch_tol = 0.1;
    double planted_tol = 0.05;
};

struct FlatnessConfig {
    bool enabled = true;
    double r_max = 0.4;
    double ratio = 0.7;
    double drift_max = 5.0;
};

struct DiagnosticsConfig {
    std::optional<Point> center;
    Point anchor;
    std::vector<std::string> required;
    BoundaryOptions boundary;
    double margin_cells = 8.0;
    double bernoulli_max = 0.05;
    std::vector<double> nondegeneracy_radii;
    double nondegeneracy_min = 0.1;
    double proportionality_radius = 0.1;
    double proportionality_c_tol = 0.05;
    double proportionality_max_residual = 0.1;
    FlatnessConfig flatness;
    FrequencyConfig frequency;
};

struct LinearizedConfig {
    std::vector<int> refinements;
    ThinOptions options;
    double complementarity_tol = 1e-6;
    double homogeneity_tol = 0.05;
    double rate_min = 1.8;
};

struct RunConfig {
    GridSpec grid;
    DomainSpec domain;
    Params params;
    std::string preset;
    PresetParams preset_params;
    std::optional<std::string> file_u;
    std::optional<std::string> file_v;
    SolveOptions solve;
    DiagnosticsConfig diagnostics;
    LinearizedConfig linearized;
    std::string output_dir;
    int threads = 0;
};

/// Typed view of a resolved config; validates module invariants.
RunConfig parse_config(const Json& resolved);

LatticePtr make_lattice(const RunConfig& config);

/// JSON text with every floating-point number printed with 17 significant digits.
std::string dump_json(const Json& j, int indent = 2);

}  // namespace bimembrane::cli
