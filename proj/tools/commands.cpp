#include "commands.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "bimembrane/flatness.hpp"
#include "bimembrane/grid_io.hpp"

namespace bimembrane::cli {

namespace fs = std::filesystem;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Check {
    std::string name;
    /// pass | fail | vacuous | skipped
    std::string status;
    double measured = kNaN;
    double threshold = kNaN;
    bool required = false;
    std::string detail;
};

class Checks {
public:
    explicit Checks(std::vector<std::string> required) : required_(std::move(required)) {}

    void add(std::string name, bool passed, double measured, double threshold, std::string detail = {}) {
        push({std::move(name), passed ? "pass" : "fail", measured, threshold, false, std::move(detail)});
    }
    void vacuous(std::string name, std::string detail) {
        push({std::move(name), "vacuous", kNaN, kNaN, false, std::move(detail)});
    }
    void skipped(std::string name, std::string detail) {
        push({std::move(name), "skipped", kNaN, kNaN, false, std::move(detail)});
    }

    bool required_failed() const {
        return std::any_of(list_.begin(), list_.end(), [](const Check& c) { return c.required && c.status == "fail"; });
    }

    Json to_json() const {
        Json arr = Json::array();
        for (const Check& c : list_) {
            arr.push_back({{"name", c.name},
                           {"status", c.status},
                           {"measured", c.measured},
                           {"threshold", c.threshold},
                           {"required", c.required},
                           {"detail", c.detail}});
        }
        return arr;
    }

    void print(std::ostream& os) const {
        for (const Check& c : list_) {
            os << c.name << ": " << c.status;
            if (std::isfinite(c.measured)) os << " measured=" << format_double(c.measured);
            if (std::isfinite(c.threshold)) os << " threshold=" << format_double(c.threshold);
            if (c.required) os << " (required)";
            os << "\n";
        }
    }

private:
    void push(Check c) {
        c.required = std::find(required_.begin(), required_.end(), c.name) != required_.end();
        list_.push_back(std::move(c));
    }

    std::vector<std::string> required_;
    std::vector<Check> list_;
};

fs::path prepare_output(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir + "': " + ec.message());
    return fs::path(dir);
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write '" + path.string() + "'");
    return os;
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os = open_output(path);
    os << text;
    if (!os) throw IoError("write failed for '" + path.string() + "'");
}

void save_grid(const fs::path& path, const ScalarField& f) {
    try {
        write_grid(path.string(), f);
    } catch (const GridIoError& e) {
        throw IoError(e.what());
    }
}

ScalarField load_grid(const fs::path& path) {
    try {
        return read_grid(path.string());
    } catch (const GridIoError& e) {
        throw IoError(e.what());
    } catch (const std::invalid_argument& e) {
        throw IoError("'" + path.string() + "': " + e.what());
    }
}

/// Second field re-based onto the lattice of the first; IoError when the grids differ.
ScalarField same_lattice(const ScalarField& a, const ScalarField& b, const std::string& what) {
    if (!(a.spec() == b.spec())) throw IoError(what + ": grids differ");
    for (std::size_t k = 0; k < a.spec().size(); ++k) {
        if (a.lattice().masked(k) != b.lattice().masked(k)) throw IoError(what + ": masks differ");
    }
    const auto vals = b.values();
    return ScalarField(a.lattice_ptr(), std::vector<double>(vals.begin(), vals.end()));
}

const char* csv_bool(bool b) { return b ? "1" : "0"; }

Json point_json(Point p) { return Json::array({p.x, p.y}); }

void require_family(const RunConfig& c, PresetFamily family, const std::string& hint) {
    const PresetInfo& info = find_preset(c.preset);
    if (info.family != family) {
        throw ConfigError("boundary.preset",
                          "preset '" + c.preset + "' is a " + to_string(info.family) + " preset; " + hint);
    }
}

// ---------------------------------------------------------------- diagnose helpers

double reach(const FieldPair& pair, Point p) {
    return pair.lattice().domain().distance_to_boundary(p, pair.spec());
}

std::optional<Point> nearest_on_polylines(const std::vector<Polyline>& lines, Point anchor) {
    std::optional<Point> best;
    double best_d = std::numeric_limits<double>::infinity();
    for (const Polyline& line : lines) {
        for (std::size_t k = 0; k + 1 < line.vertices.size(); ++k) {
            const Point a = line.vertices[k];
            const Point b = line.vertices[k + 1];
            const Point ab = b - a;
            const double len2 = dot(ab, ab);
            const double t = len2 > 0.0 ? std::clamp(dot(anchor - a, ab) / len2, 0.0, 1.0) : 0.0;
            const Point q = a + t * ab;
            const double d = distance(q, anchor);
            if (d < best_d) {
                best_d = d;
                best = q;
            }
        }
    }
    return best;
}

void write_boundary_csv(const fs::path& path, const BoundarySet& bs) {
    std::ofstream os = open_output(path);
    os << "x,y,phase,normal_x,normal_y,grad_u,grad_v,residual,source,polyline,segment\n";
    for (const FreeBoundarySample& s : bs.samples) {
        os << format_double(s.location.x) << ',' << format_double(s.location.y) << ',' << to_string(s.phase) << ','
           << format_double(s.normal.x) << ',' << format_double(s.normal.y) << ',' << format_double(s.grad_u) << ','
           << format_double(s.grad_v) << ',' << format_double(s.residual) << ',' << s.source << ',' << s.polyline
           << ',' << s.segment << '\n';
    }
}

void boundary_checks(const FieldPair& pair, const BoundarySet& bs, const DiagnosticsConfig& d, Checks& checks) {
    const double h = pair.spec().h;
    const double margin = d.margin_cells * h;
    if (bs.samples.empty()) {
        for (const char* name : {"bernoulli_max_residual", "nondegeneracy_min_ratio", "proportionality",
                                 "proportionality_residual"}) {
            checks.vacuous(name, "no free-boundary samples");
        }
        return;
    }

    double worst = 0.0;
    std::size_t used = 0;
    for (const FreeBoundarySample& s : bs.samples) {
        if (!std::isfinite(s.residual) || reach(pair, s.location) < margin) continue;
        worst = std::max(worst, s.residual);
        ++used;
    }
    if (used == 0) {
        checks.vacuous("bernoulli_max_residual", "no sample clears the boundary margin");
    } else {
        checks.add("bernoulli_max_residual", worst <= d.bernoulli_max, worst, d.bernoulli_max,
                   std::to_string(used) + " samples at distance >= " + format_double(margin));
    }

    const NondegeneracyTable nd = nondegeneracy_scan(pair, bs, d.nondegeneracy_radii);
    if (nd.rows.empty()) {
        checks.vacuous("nondegeneracy_min_ratio", "no admissible (sample, radius) pair");
    } else {
        checks.add("nondegeneracy_min_ratio", nd.min_ratio >= d.nondegeneracy_min, nd.min_ratio,
                   d.nondegeneracy_min, std::to_string(nd.rows.size()) + " rows");
    }

    // The fit needs at least 8 cells of radius.
    const double r = std::max(d.proportionality_radius, 8.0 * h);
    const double target = std::sqrt(pair.params.lambda_u / pair.params.lambda_v);
    double c_err = 0.0;
    double res = 0.0;
    std::size_t fits = 0;
    std::string failure;
    for (const FreeBoundarySample& s : bs.samples) {
        if (s.phase != Phase::TwoPhase || reach(pair, s.location) < r + margin) continue;
        try {
            const ProportionalityFit fit = proportionality_fit(pair, s.location, r);
            c_err = std::max(c_err, std::abs(fit.c / target - 1.0));
            res = std::max(res, fit.rel_residual);
            ++fits;
        } catch (const std::exception& e) {
            failure = e.what();
            c_err = std::numeric_limits<double>::infinity();
        }
    }
    if (fits == 0 && failure.empty()) {
        checks.vacuous("proportionality", "no regular two-phase sample");
        checks.vacuous("proportionality_residual", "no regular two-phase sample");
    } else {
        const std::string detail = failure.empty() ? std::to_string(fits) + " samples at r = " + format_double(r) + ", |c / sqrt(Lu/Lv) - 1|"
                                               : failure;
        checks.add("proportionality", c_err <= d.proportionality_c_tol, c_err, d.proportionality_c_tol, detail);
        checks.add("proportionality_residual", failure.empty() && res <= d.proportionality_max_residual, res,
                   d.proportionality_max_residual, std::to_string(fits) + " samples");
    }
}

Json flatness_part(const FieldPair& pair, const std::optional<Point>& center, const FlatnessConfig& f,
                   const fs::path& out, Checks& checks) {
    const double h = pair.spec().h;
    if (!f.enabled) {
        checks.skipped("flatness_decay", "disabled");
        checks.skipped("flatness_normal_drift", "disabled");
        return nullptr;
    }
    if (!center) {
        write_text(out / "flatness_trace.csv", "r,eps,nu_x,nu_y,gamma_u,floor_flag\n");
        checks.vacuous("flatness_decay", "no free boundary");
        checks.vacuous("flatness_normal_drift", "no free boundary");
        return nullptr;
    }
    std::vector<double> radii;
    for (double r = std::min(f.r_max, reach(pair, *center)); r > 2.0 * h; r *= f.ratio) radii.push_back(r);
    if (radii.empty()) {
        checks.vacuous("flatness_decay", "center too close to the domain boundary");
        checks.vacuous("flatness_normal_drift", "center too close to the domain boundary");
        return nullptr;
    }
    const FlatnessTrace trace = flatness_decay_trace(pair, *center, radii);
    std::ofstream os = open_output(out / "flatness_trace.csv");
    os << "r,eps,nu_x,nu_y,gamma_u,floor_flag\n";
    for (std::size_t k = 0; k < trace.certificates.size(); ++k) {
        const FlatnessCertificate& c = trace.certificates[k];
        os << format_double(c.r) << ',' << format_double(c.epsilon) << ',' << format_double(c.nu.x) << ','
           << format_double(c.nu.y) << ',' << format_double(c.gamma_u) << ',' << csv_bool(trace.floor_flags[k])
           << '\n';
    }
    if (std::isnan(trace.max_ratio_above_floor)) {
        checks.vacuous("flatness_decay", "no consecutive radii above the 2h/r floor");
    } else {
        checks.add("flatness_decay", trace.max_ratio_above_floor <= 1.0, trace.max_ratio_above_floor, 1.0,
                   "max eps(ratio r)/eps(r) above the floor");
    }
    checks.add("flatness_normal_drift", trace.drift_constant <= f.drift_max, trace.drift_constant, f.drift_max,
               "max |nu' - nu| / eps");
    return {{"slope", trace.slope},
            {"max_ratio_above_floor", trace.max_ratio_above_floor},
            {"drift_constant", trace.drift_constant}};
}

const char* kFrequencyChecks[] = {"frequency_lower_bound", "frequency_log_derivative_min", "frequency_cubic_height",
                                  "frequency_monotonicity", "frequency_estimator_mismatch"};

Json frequency_part(const FieldPair& pair, const BoundarySet& bs, const std::optional<Point>& center,
                    const RunConfig& c, const fs::path& out, Checks& checks) {
    const FrequencyConfig& f = c.diagnostics.frequency;
    const bool planted = find_preset(c.preset).family == PresetFamily::Planted;
    const double h = pair.spec().h;
    if (!f.enabled) {
        for (const char* name : kFrequencyChecks) checks.skipped(name, "disabled");
        if (planted) checks.skipped("frequency_planted", "disabled");
        return nullptr;
    }
    const char* header = "r,H,A,B,Htilde,dHtilde_bulk,dHtilde_diff,Ntilde,truncated\n";
    auto vacuous_all = [&](const std::string& why) {
        write_text(out / "frequency_trace.csv", header);
        for (const char* name : kFrequencyChecks) checks.vacuous(name, why);
        if (planted) checks.vacuous("frequency_planted", why);
    };
    if (!center) {
        vacuous_all("no free boundary");
        return nullptr;
    }
    const double r_hi = std::min(f.r_max, reach(pair, *center) - h);
    const double r_lo = std::max(f.r_min, f.r_min_cells * h);
    std::vector<double> radii;
    for (double r = r_hi; r >= r_lo * (1.0 - 1e-12); r *= f.ratio) radii.push_back(r);
    std::reverse(radii.begin(), radii.end());
    if (radii.size() < 2) {
        vacuous_all("fewer than two admissible radii");
        return nullptr;
    }
    const Point nu = f.options.half_plane_phases ? Point{0.0, 1.0} : initial_flatness_normal(pair, *center, 5.0 * h);
    const FrequencyTrace trace = frequency_trace(pair, *center, nu, radii, bs, f.options);

    std::ofstream os = open_output(out / "frequency_trace.csv");
    os << header;
    for (const FrequencyRow& r : trace.rows) {
        os << format_double(r.r) << ',' << format_double(r.H) << ',' << format_double(r.A) << ','
           << format_double(r.B) << ',' << format_double(r.Htilde) << ',' << format_double(r.dHtilde_bulk) << ','
           << format_double(r.dHtilde_diff) << ',' << format_double(r.Ntilde) << ',' << csv_bool(r.truncated)
           << '\n';
    }

    const double floor = f.floor_cells * h;
    const LowerBoundReport lb = lower_bound_check(trace, f.lower_bound_tol);
    if (lb.vacuous) {
        checks.vacuous("frequency_lower_bound", "every row is truncated");
    } else {
        checks.add("frequency_lower_bound", lb.passed, lb.min_Ntilde, 1.5 - f.lower_bound_tol,
                   std::to_string(lb.rows_used) + " non-truncated rows");
    }

    const double logd = untruncated_frequency_min(trace, floor);
    if (std::isinf(logd)) {
        checks.vacuous("frequency_log_derivative_min", "no row above the floor with Htilde > 0");
    } else {
        checks.add("frequency_log_derivative_min", logd >= f.log_derivative_min, logd, f.log_derivative_min,
                   "min (r/2) dHtilde/Htilde for r >= " + format_double(floor));
    }

    try {
        const CubicHeightReport cubic = cubic_height_check(trace, floor, f.slope_min, true);
        checks.add("frequency_cubic_height", cubic.passed, cubic.slope, f.slope_min,
                   std::to_string(cubic.rows_used) + " rows, r >= " + format_double(floor));
    } catch (const std::exception& e) {
        checks.vacuous("frequency_cubic_height", e.what());
    }

    const MonotonicityReport mono = monotonicity_report(trace);
    checks.add("frequency_monotonicity", std::isfinite(mono.C), mono.C, mono.C_grid.back(),
               "smallest grid C making (1 + C r^sigma) Ntilde nondecreasing");

    double mismatch = 0.0;
    std::size_t compared = 0;
    for (const FrequencyRow& r : trace.rows) {
        if (r.r < floor || !(std::abs(r.dHtilde_diff) > 0.0) || !std::isfinite(r.dHtilde_bulk)) continue;
        mismatch = std::max(mismatch, std::abs(r.dHtilde_bulk - r.dHtilde_diff) / std::abs(r.dHtilde_diff));
        ++compared;
    }
    if (compared == 0) {
        checks.vacuous("frequency_estimator_mismatch", "no comparable rows above the floor");
    } else {
        checks.add("frequency_estimator_mismatch", mismatch <= f.mismatch_tol, mismatch, f.mismatch_tol,
                   "max |bulk - diff| / |diff|");
    }

    if (planted) {
        const double lambda = planted_lambda(c.preset);
        double dev = 0.0;
        for (const FrequencyRow& r : trace.rows) dev = std::max(dev, std::abs(r.Ntilde - lambda));
        checks.add("frequency_planted", dev <= f.planted_tol, dev, f.planted_tol,
                   "max |Ntilde - " + format_double(lambda) + "| over " + std::to_string(trace.rows.size()) + " radii");
    }
    return {{"nu", point_json(nu)},
            {"rows", trace.rows.size()},
            {"tail_bound", trace.tail_bound},
            {"skipped_segments", trace.skipped_segments},
            {"monotonicity_C", mono.C}};
}

FieldPair load_pair(const RunConfig& c, const std::optional<std::string>& fields_dir) {
    if (!fields_dir && find_preset(c.preset).family == PresetFamily::Planted) {
        return preset_planted_pair(c.preset, make_lattice(c), c.params, c.preset_params);
    }
    const fs::path dir = fields_dir.value_or(c.output_dir);
    ScalarField u = load_grid(dir / "u.grid");
    ScalarField v = same_lattice(u, load_grid(dir / "v.grid"), "u.grid / v.grid");
    FieldPair pair{std::move(u), std::move(v), c.params};
    return pair;
}

// ---------------------------------------------------------------- linearized helpers

double sampled_distance(const ScalarField& coarse, const ScalarField& fine) {
    const GridSpec& s = coarse.spec();
    double e = 0.0;
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            if (!coarse.lattice().masked(i, j)) continue;
            const auto val = fine.sample(s.node(i, j));
            if (!val) continue;
            e = std::max(e, std::abs(coarse.at(i, j) - *val));
        }
    }
    return e;
}

std::size_t bitwise_differences(const ScalarField& a, const ScalarField& b) {
    std::size_t n = 0;
    for (std::size_t k = 0; k < a.spec().size(); ++k) {
        if (std::bit_cast<std::uint64_t>(a[k]) != std::bit_cast<std::uint64_t>(b[k])) ++n;
    }
    return n;
}

}  // namespace

int cmd_solve(const Json& config) {
    const RunConfig c = parse_config(config);
    if (!c.file_u) {
        const bool planted = find_preset(c.preset).family == PresetFamily::Planted;
        require_family(c, PresetFamily::BoundaryValue,
                       planted ? "planted fields are sampled directly by diagnose" : "use the linearized command");
    }
    BoundaryData data;
    if (c.file_u) {
        ScalarField u0 = load_grid(*c.file_u);
        ScalarField v0 = same_lattice(u0, load_grid(*c.file_v), "boundary.file_u / boundary.file_v");
        data = {std::move(u0), std::move(v0)};
    } else {
        data = preset_boundary_data(c.preset, make_lattice(c), c.params, c.preset_params);
    }
    try {
        data.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError("boundary", e.what());
    }
    const fs::path out = prepare_output(c.output_dir);

    const auto t0 = std::chrono::steady_clock::now();
    const SolveResult r = solve(data, c.params, c.solve);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    save_grid(out / "u.grid", r.pair.u);
    save_grid(out / "v.grid", r.pair.v);
    {
        std::ofstream os = open_output(out / "energy_trace.csv");
        os << "iter,delta,total_smoothed,total_sharp\n";
        for (const TraceRow& row : r.energy_trace) {
            os << row.iter << ',' << format_double(row.delta) << ',' << format_double(row.total_smoothed) << ','
               << format_double(row.total_sharp) << '\n';
        }
    }
    const SolveOptions resolved = c.solve.resolved(r.pair.spec().h);
    const EnergyReport e = energy(r.pair, {resolved.delta_schedule.back(), resolved.smoothing});
    Json summary = {{"command", "solve"},
                    {"preset", c.file_u ? std::string("file") : c.preset},
                    {"converged", r.converged},
                    {"iterations", r.iterations},
                    {"failed_line_searches", r.failed_line_searches},
                    {"h", r.pair.spec().h},
                    {"nx", r.pair.spec().nx},
                    {"ny", r.pair.spec().ny},
                    {"masked_nodes", r.pair.lattice().masked_count()},
                    {"energy",
                     {{"dirichlet_u", e.dirichlet_u},
                      {"dirichlet_v", e.dirichlet_v},
                      {"measure_u", e.measure_u},
                      {"measure_v", e.measure_v},
                      {"total_sharp", e.total_sharp},
                      {"total_smoothed", e.total_smoothed}}},
                    {"runtime_seconds", seconds},
                    {"config", config}};
    write_text(out / "summary.json", dump_json(summary));
    std::cout << "solve: converged=" << (r.converged ? "true" : "false") << " iterations=" << r.iterations
              << " energy=" << format_double(e.total_sharp) << " -> " << out.string() << "\n";
    return kExitOk;
}

int cmd_diagnose(const Json& config, const std::optional<std::string>& fields_dir, Scope scope) {
    const RunConfig c = parse_config(config);
    if (find_preset(c.preset).family == PresetFamily::Membrane && !fields_dir) {
        require_family(c, PresetFamily::BoundaryValue, "use the linearized command");
    }
    FieldPair pair = load_pair(c, fields_dir);
    try {
        pair.validate(false);
    } catch (const std::invalid_argument& e) {
        throw IoError(e.what());
    }
    const fs::path out = prepare_output(c.output_dir);
    const DiagnosticsConfig& d = c.diagnostics;
    Checks checks(d.required);

    const BoundarySet bs = extract_boundaries(pair, d.boundary);
    std::optional<Point> center = d.center;
    if (!center) center = nearest_on_polylines(bs.polyline_u, d.anchor);

    Json summary = {{"command", scope == Scope::All         ? "diagnose"
                                : scope == Scope::Flatness ? "flatness"
                                                           : "frequency"},
                    {"preset", c.preset},
                    {"samples", bs.samples.size()},
                    {"center", center ? point_json(*center) : Json(nullptr)}};
    if (scope == Scope::All) {
        write_boundary_csv(out / "boundary.csv", bs);
        boundary_checks(pair, bs, d, checks);
    }
    if (scope != Scope::Frequency) summary["flatness"] = flatness_part(pair, center, d.flatness, out, checks);
    if (scope != Scope::Flatness) summary["frequency"] = frequency_part(pair, bs, center, c, out, checks);

    const bool failed = checks.required_failed();
    write_text(out / "checks.json", dump_json(Json{{"checks", checks.to_json()}, {"required_failed", failed}}));
    summary["required_failed"] = failed;
    summary["config"] = config;
    write_text(out / "summary.json", dump_json(summary));
    checks.print(std::cout);
    return failed ? kExitCheckFailed : kExitOk;
}

int cmd_linearized(const Json& config) {
    const RunConfig c = parse_config(config);
    require_family(c, PresetFamily::Membrane, "use solve or diagnose");
    const fs::path out = prepare_output(c.output_dir);
    const LinearizedConfig& l = c.linearized;
    const double lh = c.params.lambda_u;
    const double lw = c.params.lambda_v;

    struct Level {
        int n;
        MembranePair sol;
        double error = kNaN;
        double rate = kNaN;
        double audit = kNaN;
    };
    std::vector<Level> levels;
    bool transmission = false;
    bool has_reference = false;
    for (int n : l.refinements) {
        const LatticePtr lat = half_disk_lattice(1.0 / n);
        const MembraneProblem prob = preset_membrane_problem(c.preset, lat, lh, lw);
        transmission = prob.transmission;
        has_reference = prob.has_reference;
        MembranePair sol = prob.transmission ? solve_transmission(prob.data_h, prob.data_w, lh, lw, l.options)
                                             : solve_two_membrane(prob.data_h, prob.data_w, lh, lw, l.options);
        Level lv{n, std::move(sol)};
        if (has_reference) {
            const MembranePair ref = reference_signorini_pair(lh, lw, lat);
            lv.error = std::max(sup_distance(lv.sol.h, ref.h), sup_distance(lv.sol.w, ref.w));
        }
        lv.audit = complementarity_audit(lv.sol).max_residual;
        levels.push_back(std::move(lv));
    }
    if (!has_reference) {
        // Self-convergence against the next refinement.
        for (std::size_t k = 0; k + 1 < levels.size(); ++k) {
            levels[k].error = std::max(sampled_distance(levels[k].sol.h, levels[k + 1].sol.h),
                                       sampled_distance(levels[k].sol.w, levels[k + 1].sol.w));
        }
    }
    for (std::size_t k = 1; k < levels.size(); ++k) {
        const double e0 = levels[k - 1].error;
        const double e1 = levels[k].error;
        if (e0 > 0.0 && e1 > 0.0) {
            levels[k].rate = std::log(e0 / e1) / std::log(static_cast<double>(levels[k].n) / levels[k - 1].n);
        }
    }

    const MembranePair& finest = levels.back().sol;
    save_grid(out / "h.grid", finest.h);
    save_grid(out / "w.grid", finest.w);
    {
        const ComplementarityAudit audit = complementarity_audit(finest);
        std::ofstream os = open_output(out / "complementarity.csv");
        os << "x,gap,dn_h,dn_w,res_h,res_w,flux\n";
        for (const ComplementarityRow& r : audit.rows) {
            os << format_double(r.x) << ',' << format_double(r.gap) << ',' << format_double(r.dn_h) << ','
               << format_double(r.dn_w) << ',' << format_double(r.res_h) << ',' << format_double(r.res_w) << ','
               << format_double(r.flux) << '\n';
        }
    }
    {
        std::ofstream os = open_output(out / "convergence.csv");
        os << "n,h,sweeps,residual,sup_error,rate,complementarity\n";
        for (const Level& lv : levels) {
            os << lv.n << ',' << format_double(1.0 / lv.n) << ',' << lv.sol.sweeps << ','
               << format_double(lv.sol.residual) << ',' << format_double(lv.error) << ',' << format_double(lv.rate)
               << ',' << format_double(lv.audit) << '\n';
        }
    }

    // Every linearized check is required.
    Checks checks({"complementarity", "error_monotone", "homogeneity", "bitwise_symmetry", "self_convergence_rate"});
    if (!transmission) {
        double worst = 0.0;
        for (const Level& lv : levels) worst = std::max(worst, lv.audit);
        checks.add("complementarity", worst <= l.complementarity_tol, worst, l.complementarity_tol,
                   "max over refinements and thin-set nodes");
    }
    if (has_reference) {
        double worst_ratio = 0.0;
        for (std::size_t k = 1; k < levels.size(); ++k) {
            worst_ratio = std::max(worst_ratio, levels[k].error / levels[k - 1].error);
        }
        if (levels.size() < 2) {
            checks.vacuous("error_monotone", "single refinement");
        } else {
            checks.add("error_monotone", worst_ratio < 1.0, worst_ratio, 1.0, "max sup_error(h/2) / sup_error(h)");
        }
        const auto [w1, w2] = split_membranes(finest);
        const HomogeneityEstimate est = estimate_homogeneity(w1, {0.0, 0.0}, {0.1, 0.15, 0.2, 0.25, 0.3});
        checks.add("homogeneity", std::abs(est.extrapolated - 1.5) <= l.homogeneity_tol, est.extrapolated, 1.5,
                   "Almgren quotient of h - w extrapolated to r = 0, tolerance " + format_double(l.homogeneity_tol));
    }
    if (c.preset == "transmission_symmetric") {
        std::size_t diff = 0;
        for (const Level& lv : levels) diff += bitwise_differences(lv.sol.h, lv.sol.w);
        checks.add("bitwise_symmetry", diff == 0, static_cast<double>(diff), 0.0, "nodes where h and w differ");
    } else if (transmission) {
        double worst = std::numeric_limits<double>::infinity();
        for (const Level& lv : levels) {
            if (std::isfinite(lv.rate)) worst = std::min(worst, lv.rate);
        }
        if (std::isinf(worst)) {
            checks.vacuous("self_convergence_rate", "need at least three refinements");
        } else {
            checks.add("self_convergence_rate", worst >= l.rate_min, worst, l.rate_min, "min observed order");
        }
    }

    const bool failed = checks.required_failed();
    write_text(out / "checks.json", dump_json(Json{{"checks", checks.to_json()}, {"required_failed", failed}}));
    Json rows = Json::array();
    for (const Level& lv : levels) {
        rows.push_back({{"n", lv.n},
                        {"sweeps", lv.sol.sweeps},
                        {"converged", lv.sol.converged},
                        {"sup_error", lv.error},
                        {"complementarity", lv.audit}});
    }
    Json summary = {{"command", "linearized"},
                    {"preset", c.preset},
                    {"mode", transmission ? "transmission" : "two_membrane"},
                    {"levels", rows},
                    {"required_failed", failed},
                    {"config", config}};
    write_text(out / "summary.json", dump_json(summary));
    checks.print(std::cout);
    return failed ? kExitCheckFailed : kExitOk;
}

int cmd_preset_list(std::ostream& os) {
    for (const PresetInfo& p : preset_catalog()) {
        os << p.name << "\t" << to_string(p.family) << "\t" << p.summary << "\n";
    }
    return kExitOk;
}

int cmd_preset_show(const std::string& name, std::ostream& os) {
    ConfigSources src;
    src.preset = name;
    os << dump_json(resolve_config(src));
    return kExitOk;
}

}  // namespace bimembrane::cli
