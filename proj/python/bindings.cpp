#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "bimembrane/energy.hpp"
#include "bimembrane/flatness.hpp"
#include "bimembrane/free_boundary.hpp"
#include "bimembrane/frequency.hpp"
#include "bimembrane/grid_io.hpp"
#include "bimembrane/presets.hpp"
#include "bimembrane/solver.hpp"
#include "bimembrane/thin_limits.hpp"

namespace py = pybind11;
using namespace bimembrane;

namespace {

/// Copy of a field as a (ny, nx) array, NaN outside the domain. Row j holds y = y0 + j h.
py::array_t<double> to_array(const ScalarField& f) {
    const GridSpec& s = f.spec();
    py::array_t<double> a({s.ny, s.nx});
    auto m = a.mutable_unchecked<2>();
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) m(j, i) = f.at(i, j);
    }
    return a;
}

py::dict grid_info(const GridSpec& s) {
    py::dict d;
    d["h"] = s.h;
    d["nx"] = s.nx;
    d["ny"] = s.ny;
    d["x0"] = s.x0;
    d["y0"] = s.y0;
    return d;
}

LatticePtr disk_lattice(double h) { return Lattice::make(GridSpec::centered_square(1.0, h), DomainSpec::disk(1.0)); }

Params make_params(double lambda_u) {
    Params p{lambda_u, 1.0 - lambda_u};
    p.validate();
    return p;
}

Point to_point(const std::pair<double, double>& p) { return {p.first, p.second}; }

}  // namespace

PYBIND11_MODULE(_bimembrane, m) {
    m.doc() = "Constrained two-phase Bernoulli problem: solver and diagnostics.";

    py::register_exception<GridIoError>(m, "GridIoError", PyExc_IOError);

    py::class_<FieldPair>(m, "FieldPair")
        .def_property_readonly("u", [](const FieldPair& p) { return to_array(p.u); })
        .def_property_readonly("v", [](const FieldPair& p) { return to_array(p.v); })
        .def_property_readonly("grid", [](const FieldPair& p) { return grid_info(p.spec()); })
        .def_property_readonly("lambda_u", [](const FieldPair& p) { return p.params.lambda_u; })
        .def_property_readonly("lambda_v", [](const FieldPair& p) { return p.params.lambda_v; });

    m.def("project_cone", &project_cone, py::arg("a"), py::arg("b"),
          "Euclidean projection of (a, b) onto {a >= b >= 0}.");

    m.def("preset_names", [] {
        std::vector<std::string> names;
        for (const PresetInfo& p : preset_catalog()) names.push_back(p.name);
        return names;
    });

    m.def(
        "solve",
        [](const std::string& preset, double h, double lambda_u, const std::string& smoothing,
           std::optional<double> amplitude) {
            const Params p = make_params(lambda_u);
            PresetParams pp;
            if (amplitude) pp.amplitude = *amplitude;
            const BoundaryData data = preset_boundary_data(preset, disk_lattice(h), p, pp);
            SolveOptions opts;
            opts.smoothing = smoothing_kind_from_string(smoothing);
            SolveResult r;
            {
                py::gil_scoped_release release;
                r = solve(data, p, opts);
            }
            py::dict d;
            d["converged"] = r.converged;
            d["iterations"] = r.iterations;
            d["pair"] = r.pair;
            return d;
        },
        py::arg("preset") = "plane", py::arg("h") = 1.0 / 64, py::arg("lambda_u") = 0.7,
        py::arg("smoothing") = "concave", py::arg("amplitude") = py::none(),
        "Minimize the smoothed functional with boundary data from a preset on the unit disk.");

    m.def(
        "planted",
        [](double lambda, double h, double lambda_u, std::optional<double> amplitude) {
            const double a = amplitude.value_or(planted_amplitude(lambda, 10.0 * h, 0.1));
            return planted_profile_pair(make_params(lambda_u), disk_lattice(h), lambda, a);
        },
        py::arg("lam"), py::arg("h") = 1.0 / 128, py::arg("lambda_u") = 0.7, py::arg("amplitude") = py::none(),
        "Plane solution plus a lambda-homogeneous harmonic deviation.");

    m.def(
        "energy",
        [](const FieldPair& pair, double delta, const std::string& smoothing) {
            const EnergyReport e = energy(pair, {delta, smoothing_kind_from_string(smoothing)});
            py::dict d;
            d["dirichlet_u"] = e.dirichlet_u;
            d["dirichlet_v"] = e.dirichlet_v;
            d["measure_u"] = e.measure_u;
            d["measure_v"] = e.measure_v;
            d["total_sharp"] = e.total_sharp;
            d["total_smoothed"] = e.total_smoothed;
            return d;
        },
        py::arg("pair"), py::arg("delta"), py::arg("smoothing") = "concave");

    m.def(
        "boundary_samples",
        [](const FieldPair& pair) {
            py::list out;
            for (const FreeBoundarySample& s : extract_boundaries(pair).samples) {
                py::dict d;
                d["x"] = s.location.x;
                d["y"] = s.location.y;
                d["phase"] = to_string(s.phase);
                d["normal"] = std::make_pair(s.normal.x, s.normal.y);
                d["grad_u"] = s.grad_u;
                d["grad_v"] = s.grad_v;
                d["residual"] = s.residual;
                out.append(d);
            }
            return out;
        },
        py::arg("pair"));

    m.def(
        "flatness",
        [](const FieldPair& pair, std::pair<double, double> center, double r) {
            const FlatnessCertificate c = measure_flatness(pair, to_point(center), r);
            py::dict d;
            d["epsilon"] = c.epsilon;
            d["nu"] = std::make_pair(c.nu.x, c.nu.y);
            d["gamma_u"] = c.gamma_u;
            d["gamma_v"] = c.gamma_v;
            return d;
        },
        py::arg("pair"), py::arg("center"), py::arg("r"));

    m.def(
        "frequency_trace",
        [](const FieldPair& pair, std::pair<double, double> center, std::pair<double, double> nu,
           const std::vector<double>& radii, bool half_plane_phases) {
            FrequencyOptions o;
            o.half_plane_phases = half_plane_phases;
            const BoundarySet bs = half_plane_phases ? BoundarySet{} : extract_boundaries(pair);
            const FrequencyTrace t = frequency_trace(pair, to_point(center), to_point(nu), radii, bs, o);
            py::list rows;
            for (const FrequencyRow& r : t.rows) {
                py::dict d;
                d["r"] = r.r;
                d["H"] = r.H;
                d["Htilde"] = r.Htilde;
                d["Ntilde"] = r.Ntilde;
                d["truncated"] = r.truncated;
                rows.append(d);
            }
            return rows;
        },
        py::arg("pair"), py::arg("center"), py::arg("nu"), py::arg("radii"), py::arg("half_plane_phases") = false);

    m.def(
        "signorini",
        [](int n, double lambda_h, double lambda_w) {
            const LatticePtr lat = half_disk_lattice(1.0 / n);
            const MembraneProblem prob = preset_membrane_problem("signorini", lat, lambda_h, lambda_w);
            MembranePair sol;
            {
                py::gil_scoped_release release;
                sol = solve_two_membrane(prob.data_h, prob.data_w, lambda_h, lambda_w);
            }
            const MembranePair ref = reference_signorini_pair(lambda_h, lambda_w, lat);
            py::dict d;
            d["h"] = to_array(sol.h);
            d["w"] = to_array(sol.w);
            d["grid"] = grid_info(lat->spec());
            d["sup_error"] = std::max(sup_distance(sol.h, ref.h), sup_distance(sol.w, ref.w));
            d["complementarity"] = complementarity_audit(sol).max_residual;
            return d;
        },
        py::arg("n") = 32, py::arg("lambda_h") = 0.7, py::arg("lambda_w") = 0.3,
        "Two-membrane thin-obstacle problem on the upper half disk with the 3/2-homogeneous reference data.");

    m.def(
        "read_grid",
        [](const std::string& path) {
            const ScalarField f = read_grid(path);
            py::dict d;
            d["values"] = to_array(f);
            d["grid"] = grid_info(f.spec());
            return d;
        },
        py::arg("path"));
}
