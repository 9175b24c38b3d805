#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "bimembrane/grid_io.hpp"

namespace bimembrane::cli {

namespace {

// Diagnose checks required by default.
const std::vector<std::string> kAllChecks = {
    "bernoulli_max_residual",       "nondegeneracy_min_ratio", "proportionality",
    "proportionality_residual",     "flatness_decay",          "flatness_normal_drift",
    "frequency_lower_bound",        "frequency_log_derivative_min", "frequency_cubic_height",
    "frequency_monotonicity",       "frequency_estimator_mismatch",
};

bool known_check(const std::string& name) {
    return name == "frequency_planted" || std::find(kAllChecks.begin(), kAllChecks.end(), name) != kAllChecks.end();
}

std::string join(const std::string& base, const std::string& key) { return base.empty() ? key : base + "." + key; }

const char* type_name(const Json& j) {
    if (j.is_number()) return "number";
    return j.type_name();
}

bool same_kind(const Json& a, const Json& b) {
    if (a.is_number() && b.is_number()) return true;
    return a.type() == b.type();
}

// Recursive overlay; every key of `over` must exist in `schema` (a default tree).
void merge(Json& target, const Json& over, const Json& schema, const std::string& path) {
    if (!over.is_object()) throw ConfigError(path, "expected an object");
    for (auto it = over.begin(); it != over.end(); ++it) {
        const std::string p = join(path, it.key());
        if (!schema.contains(it.key())) throw ConfigError(p, "unknown key");
        const Json& def = schema.at(it.key());
        if (def.is_object()) {
            merge(target[it.key()], it.value(), def, p);
            continue;
        }
        if (!def.is_null() && !it.value().is_null() && !same_kind(def, it.value())) {
            throw ConfigError(p, std::string("expected ") + type_name(def) + ", got " + type_name(it.value()));
        }
        target[it.key()] = it.value();
    }
}

Json parse_set(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("", "--set expects KEY=VALUE, got '" + assignment + "'");
    const std::string key = assignment.substr(0, eq);
    const std::string text = assignment.substr(eq + 1);
    Json value;
    try {
        value = Json::parse(text);
    } catch (const Json::parse_error&) {
        value = text;
    }
    Json over = Json::object();
    Json* node = &over;
    std::stringstream ss(key);
    std::string part;
    std::vector<std::string> parts;
    while (std::getline(ss, part, '.')) parts.push_back(part);
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) node = &(*node)[parts[i]];
    (*node)[parts.back()] = value;
    return over;
}

double number(const Json& root, const std::string& path) {
    const Json* node = &root;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) node = &node->at(part);
    if (!node->is_number()) throw ConfigError(path, "expected a number");
    const double x = node->get<double>();
    if (!std::isfinite(x)) throw ConfigError(path, "must be finite");
    return x;
}

const Json& node_at(const Json& root, const std::string& path) {
    const Json* node = &root;
    std::stringstream ss(path);
    std::string part;
    while (std::getline(ss, part, '.')) node = &node->at(part);
    return *node;
}

int integer(const Json& root, const std::string& path) {
    const Json& n = node_at(root, path);
    if (!n.is_number_integer()) throw ConfigError(path, "expected an integer");
    return n.get<int>();
}

bool boolean(const Json& root, const std::string& path) {
    const Json& n = node_at(root, path);
    if (!n.is_boolean()) throw ConfigError(path, "expected a boolean");
    return n.get<bool>();
}

std::optional<double> optional_number(const Json& root, const std::string& path) {
    const Json& n = node_at(root, path);
    if (n.is_null()) return std::nullopt;
    return number(root, path);
}

std::optional<std::string> optional_string(const Json& root, const std::string& path) {
    const Json& n = node_at(root, path);
    if (n.is_null()) return std::nullopt;
    if (!n.is_string()) throw ConfigError(path, "expected a string");
    return n.get<std::string>();
}

std::vector<double> numbers(const Json& root, const std::string& path) {
    const Json& n = node_at(root, path);
    if (!n.is_array()) throw ConfigError(path, "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < n.size(); ++i) {
        if (!n[i].is_number()) throw ConfigError(path + "[" + std::to_string(i) + "]", "expected a number");
        out.push_back(n[i].get<double>());
    }
    return out;
}

Point point(const Json& root, const std::string& path) {
    const auto v = numbers(root, path);
    if (v.size() != 2) throw ConfigError(path, "expected [x, y]");
    return {v[0], v[1]};
}

void positive(double x, const std::string& path) {
    if (!(x > 0.0)) throw ConfigError(path, "must be positive");
}

void write_json(std::ostream& os, const Json& j, int indent, int depth) {
    const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
    const std::string close(static_cast<std::size_t>(indent * depth), ' ');
    const char* nl = indent > 0 ? "\n" : "";
    switch (j.type()) {
        case Json::value_t::object: {
            if (j.empty()) {
                os << "{}";
                return;
            }
            os << "{" << nl;
            bool first = true;
            for (auto it = j.begin(); it != j.end(); ++it) {
                if (!first) os << "," << nl;
                first = false;
                os << pad << Json(it.key()).dump() << (indent > 0 ? ": " : ":");
                write_json(os, it.value(), indent, depth + 1);
            }
            os << nl << close << "}";
            return;
        }
        case Json::value_t::array: {
            if (j.empty()) {
                os << "[]";
                return;
            }
            os << "[" << nl;
            for (std::size_t i = 0; i < j.size(); ++i) {
                if (i) os << "," << nl;
                os << pad;
                write_json(os, j[i], indent, depth + 1);
            }
            os << nl << close << "]";
            return;
        }
        case Json::value_t::number_float: {
            const double x = j.get<double>();
            // JSON has no inf/nan.
            os << (std::isfinite(x) ? format_double(x) : "null");
            return;
        }
        default:
            os << j.dump();
    }
}

}  // namespace

Json default_config() {
    return Json::parse(R"({
  "grid": {"h": 0.015625, "nx": 0, "ny": 0, "x0": null, "y0": null},
  "domain": {"kind": "disk", "radius": 1.0},
  "params": {"lambda_u": 0.7, "lambda_v": 0.3},
  "boundary": {"preset": "plane", "amplitude": null, "normal_angle": 1.5707963267948966,
               "file_u": null, "file_v": null},
  "solve": {"delta_schedule": [], "step0": 0.0, "max_outer": 400, "tol_energy": 1e-9, "tol_step": 1e-6,
            "relax_sweeps": 50, "seed": 0, "init_noise": 0.0, "smoothing": "concave", "polish": true},
  "diagnostics": {
    "center": null,
    "anchor": [0.0, 0.0],
    "required": null,
    "boundary": {"kappa": 1.5, "normal_window": 0.0, "probe": 0.0, "margin_cells": 8.0, "max_residual": 0.05},
    "nondegeneracy": {"radii": [0.1, 0.2], "min_ratio": 0.1},
    "proportionality": {"radius": 0.1, "c_tol": 0.05, "max_residual": 0.1},
    "flatness": {"enabled": true, "r_max": 0.4, "ratio": 0.7, "drift_max": 5.0},
    "frequency": {"enabled": true, "sigma": 0.1, "beta": 0.3, "min_angles": 64, "half_plane_phases": false,
                  "r_min": 0.02, "r_min_cells": 6.0, "r_max": 0.45, "ratio": 0.85, "floor_cells": 10.0,
                  "lower_bound_tol": 0.1, "log_derivative_min": 1.4, "slope_min": 2.7, "mismatch_tol": 0.1,
                  "planted_tol": 0.05}
  },
  "linearized": {"refinements": [32, 64, 128], "tol": 1e-9, "max_sweeps": 400000,
                 "complementarity_tol": 1e-6, "homogeneity_tol": 0.05, "rate_min": 1.8},
  "output_dir": null,
  "threads": 0
})");
}

Json preset_overlay(const std::string& name) {
    const PresetInfo& info = find_preset(name);
    Json o = Json::object();
    o["boundary"]["preset"] = name;
    if (name == "plane") {
        o["diagnostics"]["required"] = {"bernoulli_max_residual", "nondegeneracy_min_ratio", "proportionality",
                                        "proportionality_residual", "flatness_decay", "frequency_lower_bound"};
    } else if (name == "one_phase") {
        o["diagnostics"]["required"] = {"bernoulli_max_residual", "nondegeneracy_min_ratio"};
        o["diagnostics"]["flatness"]["enabled"] = false;
        o["diagnostics"]["frequency"]["enabled"] = false;
    } else if (name == "perturbed_plane") {
        o["grid"]["h"] = 1.0 / 256.0;
    } else if (info.family == PresetFamily::Planted) {
        const double lambda = planted_lambda(name);
        o["grid"]["h"] = 1.0 / 128.0;
        o["diagnostics"]["center"] = {0.0, 0.0};
        o["diagnostics"]["frequency"]["half_plane_phases"] = true;
        o["diagnostics"]["frequency"]["r_min"] = 0.0;
        o["diagnostics"]["frequency"]["r_min_cells"] = 10.0;
        o["diagnostics"]["frequency"]["r_max"] = 0.4;
        o["diagnostics"]["flatness"]["enabled"] = false;
        o["diagnostics"]["required"] = Json::array({"frequency_planted"});
        if (lambda >= 1.5) o["diagnostics"]["required"].push_back("frequency_lower_bound");
    } else if (info.family == PresetFamily::Membrane) {
        o["domain"]["kind"] = "half_disk";
        if (name == "transmission_symmetric") {
            o["params"]["lambda_u"] = 0.5;
            o["params"]["lambda_v"] = 0.5;
            o["linearized"]["refinements"] = {32, 64};
        } else if (name == "transmission_mixed") {
            o["linearized"]["refinements"] = {16, 32, 64, 128};
        }
    }
    return o;
}

Json resolve_config(const ConfigSources& sources) {
    const Json schema = default_config();
    Json file = Json::object();
    if (sources.path) {
        std::ifstream in(*sources.path);
        if (!in) throw IoError("cannot open config '" + *sources.path + "'");
        try {
            file = Json::parse(in);
        } catch (const Json::parse_error& e) {
            throw ConfigError("", "config '" + *sources.path + "' is not valid JSON: " + e.what());
        }
        if (!file.is_object()) throw ConfigError("", "config root must be an object");
    }
    std::vector<Json> sets;
    for (const std::string& s : sources.sets) sets.push_back(parse_set(s));

    // Preset name: last --set, then --preset, then the file, then the default.
    std::string preset = schema["boundary"]["preset"].get<std::string>();
    if (file.contains("boundary") && file["boundary"].is_object() && file["boundary"].contains("preset")) {
        if (!file["boundary"]["preset"].is_string()) throw ConfigError("boundary.preset", "expected a string");
        preset = file["boundary"]["preset"].get<std::string>();
    }
    if (sources.preset) preset = *sources.preset;
    for (const Json& s : sets) {
        if (s.contains("boundary") && s["boundary"].is_object() && s["boundary"].contains("preset")) {
            if (!s["boundary"]["preset"].is_string()) throw ConfigError("boundary.preset", "expected a string");
            preset = s["boundary"]["preset"].get<std::string>();
        }
    }
    try {
        find_preset(preset);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("boundary.preset", e.what());
    }

    Json cfg = schema;
    merge(cfg, preset_overlay(preset), schema, "");
    merge(cfg, file, schema, "");
    for (const Json& s : sets) merge(cfg, s, schema, "");
    cfg["boundary"]["preset"] = preset;
    if (sources.out) cfg["output_dir"] = *sources.out;
    if (cfg["output_dir"].is_null()) {
        const char* env = std::getenv("BIMEMBRANE_OUT");
        cfg["output_dir"] = env && *env ? std::string(env) : std::string("bimembrane_out");
    }
    if (sources.threads) cfg["threads"] = *sources.threads;
    if (cfg["diagnostics"]["required"].is_null()) cfg["diagnostics"]["required"] = kAllChecks;
    // Surfaces type errors early, before anything is computed.
    parse_config(cfg);
    return cfg;
}

RunConfig parse_config(const Json& j) {
    RunConfig c;
    c.domain.kind = [&] {
        const auto s = optional_string(j, "domain.kind");
        if (!s) throw ConfigError("domain.kind", "expected a string");
        try {
            return domain_kind_from_string(*s);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("domain.kind", e.what());
        }
    }();
    c.domain.radius = number(j, "domain.radius");
    if (c.domain.kind != DomainKind::Rectangle) positive(c.domain.radius, "domain.radius");

    c.grid.h = number(j, "grid.h");
    positive(c.grid.h, "grid.h");
    c.grid.nx = integer(j, "grid.nx");
    c.grid.ny = integer(j, "grid.ny");
    if ((c.grid.nx == 0) != (c.grid.ny == 0)) throw ConfigError("grid.nx", "nx and ny must both be zero or both set");
    if (c.grid.nx == 0) {
        const double half = c.domain.kind == DomainKind::Rectangle ? 1.0 : c.domain.radius;
        const double cells = half / c.grid.h;
        if (std::abs(cells - std::round(cells)) > 1e-9 * cells) {
            throw ConfigError("grid.h", "domain half-width must be an integer multiple of h");
        }
        const GridSpec sq = GridSpec::centered_square(half, c.grid.h);
        c.grid.nx = sq.nx;
        c.grid.ny = sq.ny;
        c.grid.x0 = optional_number(j, "grid.x0").value_or(sq.x0);
        c.grid.y0 = optional_number(j, "grid.y0").value_or(sq.y0);
    } else {
        if (c.grid.nx < 3 || c.grid.ny < 3) throw ConfigError("grid.nx", "need at least 3 nodes per direction");
        c.grid.x0 = optional_number(j, "grid.x0").value_or(-0.5 * (c.grid.nx - 1) * c.grid.h);
        c.grid.y0 = optional_number(j, "grid.y0").value_or(-0.5 * (c.grid.ny - 1) * c.grid.h);
    }

    c.params.lambda_u = number(j, "params.lambda_u");
    c.params.lambda_v = number(j, "params.lambda_v");
    try {
        c.params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(c.params.lambda_v > 0.0 || !(c.params.lambda_u > 0.0) ? "params.lambda_u" : "params.lambda_v",
                          e.what());
    }

    c.preset = optional_string(j, "boundary.preset").value_or("");
    try {
        find_preset(c.preset);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("boundary.preset", e.what());
    }
    if (auto a = optional_number(j, "boundary.amplitude")) c.preset_params.amplitude = *a;
    c.preset_params.normal_angle = number(j, "boundary.normal_angle");
    c.file_u = optional_string(j, "boundary.file_u");
    c.file_v = optional_string(j, "boundary.file_v");
    if (c.file_u.has_value() != c.file_v.has_value()) {
        throw ConfigError("boundary.file_u", "file_u and file_v must be given together");
    }

    c.solve.delta_schedule = numbers(j, "solve.delta_schedule");
    c.solve.step0 = number(j, "solve.step0");
    c.solve.max_outer = integer(j, "solve.max_outer");
    c.solve.tol_energy = number(j, "solve.tol_energy");
    c.solve.tol_step = number(j, "solve.tol_step");
    c.solve.relax_sweeps = integer(j, "solve.relax_sweeps");
    {
        const Json& seed = node_at(j, "solve.seed");
        if (!seed.is_number_integer() || seed.get<long long>() < 0) {
            throw ConfigError("solve.seed", "expected a nonnegative integer");
        }
        c.solve.seed = seed.get<std::uint64_t>();
    }
    c.solve.init_noise = number(j, "solve.init_noise");
    try {
        c.solve.smoothing = smoothing_kind_from_string(optional_string(j, "solve.smoothing").value_or(""));
    } catch (const std::invalid_argument& e) {
        throw ConfigError("solve.smoothing", e.what());
    }
    c.solve.polish = boolean(j, "solve.polish");
    c.threads = integer(j, "threads");
    if (c.threads < 0) throw ConfigError("threads", "must be >= 0");
    c.solve.threads = c.threads;
    try {
        (void)c.solve.resolved(c.grid.h);
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        throw ConfigError(msg.substr(0, msg.find(' ')), msg);
    }

    DiagnosticsConfig& d = c.diagnostics;
    if (!node_at(j, "diagnostics.center").is_null()) d.center = point(j, "diagnostics.center");
    d.anchor = point(j, "diagnostics.anchor");
    {
        const Json& req = node_at(j, "diagnostics.required");
        if (!req.is_null()) {
            if (!req.is_array()) throw ConfigError("diagnostics.required", "expected an array of check names");
            for (const Json& r : req) {
                if (!r.is_string()) throw ConfigError("diagnostics.required", "expected an array of check names");
                if (!known_check(r.get<std::string>())) {
                    throw ConfigError("diagnostics.required", "unknown check '" + r.get<std::string>() + "'");
                }
                d.required.push_back(r.get<std::string>());
            }
        }
    }
    d.boundary.kappa = number(j, "diagnostics.boundary.kappa");
    d.boundary.normal_window = number(j, "diagnostics.boundary.normal_window");
    d.boundary.probe = number(j, "diagnostics.boundary.probe");
    d.margin_cells = number(j, "diagnostics.boundary.margin_cells");
    d.bernoulli_max = number(j, "diagnostics.boundary.max_residual");
    d.nondegeneracy_radii = numbers(j, "diagnostics.nondegeneracy.radii");
    for (double r : d.nondegeneracy_radii) positive(r, "diagnostics.nondegeneracy.radii");
    d.nondegeneracy_min = number(j, "diagnostics.nondegeneracy.min_ratio");
    d.proportionality_radius = number(j, "diagnostics.proportionality.radius");
    positive(d.proportionality_radius, "diagnostics.proportionality.radius");
    d.proportionality_c_tol = number(j, "diagnostics.proportionality.c_tol");
    d.proportionality_max_residual = number(j, "diagnostics.proportionality.max_residual");

    d.flatness.enabled = boolean(j, "diagnostics.flatness.enabled");
    d.flatness.r_max = number(j, "diagnostics.flatness.r_max");
    positive(d.flatness.r_max, "diagnostics.flatness.r_max");
    d.flatness.ratio = number(j, "diagnostics.flatness.ratio");
    if (!(d.flatness.ratio > 0.0 && d.flatness.ratio < 1.0)) {
        throw ConfigError("diagnostics.flatness.ratio", "must lie in (0, 1)");
    }
    d.flatness.drift_max = number(j, "diagnostics.flatness.drift_max");

    FrequencyConfig& f = d.frequency;
    f.enabled = boolean(j, "diagnostics.frequency.enabled");
    f.options.sigma = number(j, "diagnostics.frequency.sigma");
    positive(f.options.sigma, "diagnostics.frequency.sigma");
    f.options.beta = number(j, "diagnostics.frequency.beta");
    f.options.min_angles = integer(j, "diagnostics.frequency.min_angles");
    if (f.options.min_angles < 8) throw ConfigError("diagnostics.frequency.min_angles", "must be >= 8");
    f.options.half_plane_phases = boolean(j, "diagnostics.frequency.half_plane_phases");
    f.r_min = number(j, "diagnostics.frequency.r_min");
    f.r_min_cells = number(j, "diagnostics.frequency.r_min_cells");
    f.r_max = number(j, "diagnostics.frequency.r_max");
    positive(f.r_max, "diagnostics.frequency.r_max");
    f.ratio = number(j, "diagnostics.frequency.ratio");
    if (!(f.ratio > 0.0 && f.ratio < 1.0)) throw ConfigError("diagnostics.frequency.ratio", "must lie in (0, 1)");
    f.floor_cells = number(j, "diagnostics.frequency.floor_cells");
    f.lower_bound_tol = number(j, "diagnostics.frequency.lower_bound_tol");
    f.log_derivative_min = number(j, "diagnostics.frequency.log_derivative_min");
    f.slope_min = number(j, "diagnostics.frequency.slope_min");
    f.mismatch_tol = number(j, "diagnostics.frequency.mismatch_tol");
    f.planted_tol = number(j, "diagnostics.frequency.planted_tol");

    LinearizedConfig& l = c.linearized;
    for (double n : numbers(j, "linearized.refinements")) {
        if (n != std::floor(n) || n < 2) throw ConfigError("linearized.refinements", "entries must be integers >= 2");
        if (!l.refinements.empty() && !(n > l.refinements.back())) {
            throw ConfigError("linearized.refinements", "entries must increase");
        }
        l.refinements.push_back(static_cast<int>(n));
    }
    if (l.refinements.empty()) throw ConfigError("linearized.refinements", "must not be empty");
    l.options.tol = number(j, "linearized.tol");
    positive(l.options.tol, "linearized.tol");
    l.options.max_sweeps = integer(j, "linearized.max_sweeps");
    if (l.options.max_sweeps < 1) throw ConfigError("linearized.max_sweeps", "must be >= 1");
    l.options.threads = c.threads;
    l.complementarity_tol = number(j, "linearized.complementarity_tol");
    l.homogeneity_tol = number(j, "linearized.homogeneity_tol");
    l.rate_min = number(j, "linearized.rate_min");

    c.output_dir = optional_string(j, "output_dir").value_or("bimembrane_out");
    return c;
}

LatticePtr make_lattice(const RunConfig& config) {
    try {
        return Lattice::make(config.grid, config.domain);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("grid", e.what());
    }
}

std::string dump_json(const Json& j, int indent) {
    std::ostringstream os;
    write_json(os, j, indent, 0);
    if (indent > 0) os << "\n";
    return os.str();
}

}  // namespace bimembrane::cli
