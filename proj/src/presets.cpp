#include "bimembrane/presets.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bimembrane/frequency.hpp"

namespace bimembrane {

std::string to_string(PresetFamily family) {
    switch (family) {
        case PresetFamily::BoundaryValue: return "boundary_value";
        case PresetFamily::Planted: return "planted";
        case PresetFamily::Membrane: return "membrane";
    }
    return "unknown";
}

const std::vector<PresetInfo>& preset_catalog() {
    static const std::vector<PresetInfo> catalog = {
        {"plane", PresetFamily::BoundaryValue, "two-phase plane sqrt(L)(x.nu)^+ on both fields"},
        {"one_phase", PresetFamily::BoundaryValue, "u = sqrt(Lu)(x.nu)^+, v = 0"},
        {"perturbed_plane", PresetFamily::BoundaryValue, "sqrt(L)(y + a(y^2 - x^2))^+ on both fields"},
        {"zero", PresetFamily::BoundaryValue, "u = v = 0"},
        {"planted_1", PresetFamily::Planted, "sqrt(L)(y + a r cos theta)^+, homogeneity 1"},
        {"planted_1.5", PresetFamily::Planted, "sqrt(L)(y + a r^1.5 cos 1.5 theta)^+, homogeneity 1.5"},
        {"planted_2", PresetFamily::Planted, "sqrt(L)(y + a r^2 cos 2 theta)^+, homogeneity 2"},
        {"planted_2.5", PresetFamily::Planted, "sqrt(L)(y + a r^2.5 cos 2.5 theta)^+, homogeneity 2.5"},
        {"signorini", PresetFamily::Membrane, "two membranes with the r^1.5 cos(1.5 theta) reference data"},
        {"transmission_symmetric", PresetFamily::Membrane, "transmission with identical data on both membranes"},
        {"transmission_mixed", PresetFamily::Membrane, "transmission with e^x cos y and e^x sin y mixtures"},
        {"two_membrane_separated", PresetFamily::Membrane, "two membranes whose data never touch"},
    };
    return catalog;
}

const PresetInfo& find_preset(const std::string& name) {
    for (const PresetInfo& p : preset_catalog()) {
        if (p.name == name) return p;
    }
    throw std::invalid_argument("unknown preset '" + name + "'");
}

namespace {

void require_family(const PresetInfo& info, PresetFamily family) {
    if (info.family != family) {
        throw std::invalid_argument("preset '" + info.name + "' is a " + to_string(info.family) + " preset, not " +
                                    to_string(family));
    }
}

double pick(double value, double fallback) { return std::isnan(value) ? fallback : value; }

}  // namespace

BoundaryData preset_boundary_data(const std::string& name, LatticePtr lattice, const Params& params,
                                  const PresetParams& pp) {
    const PresetInfo& info = find_preset(name);
    require_family(info, PresetFamily::BoundaryValue);
    params.validate();
    const double su = std::sqrt(params.lambda_u);
    const double sv = std::sqrt(params.lambda_v);
    const Point nu = unit_from_angle(pp.normal_angle);
    auto plane = [nu](double x, double y) { return std::max(0.0, nu.x * x + nu.y * y); };
    if (name == "plane") {
        return BoundaryData::from_generators(
            lattice, [&](double x, double y) { return su * plane(x, y); },
            [&](double x, double y) { return sv * plane(x, y); });
    }
    if (name == "one_phase") {
        return BoundaryData::from_generators(
            lattice, [&](double x, double y) { return su * plane(x, y); }, [](double, double) { return 0.0; });
    }
    if (name == "perturbed_plane") {
        const double a = pick(pp.amplitude, kPerturbedPlaneAmplitude);
        auto g = [a](double x, double y) { return std::max(0.0, y + a * (y * y - x * x)); };
        return BoundaryData::from_generators(
            lattice, [&](double x, double y) { return su * g(x, y); }, [&](double x, double y) { return sv * g(x, y); });
    }
    return BoundaryData::from_generators(
        lattice, [](double, double) { return 0.0; }, [](double, double) { return 0.0; });
}

double planted_lambda(const std::string& name) {
    const PresetInfo& info = find_preset(name);
    require_family(info, PresetFamily::Planted);
    return std::stod(name.substr(std::string("planted_").size()));
}

FieldPair preset_planted_pair(const std::string& name, LatticePtr lattice, const Params& params,
                              const PresetParams& pp) {
    const double lambda = planted_lambda(name);
    const double a = pick(pp.amplitude, planted_amplitude(lambda, 10.0 * lattice->h(), 0.1));
    return planted_profile_pair(params, std::move(lattice), lambda, a);
}

MembraneProblem preset_membrane_problem(const std::string& name, LatticePtr lattice, double lambda_h,
                                        double lambda_w) {
    const PresetInfo& info = find_preset(name);
    require_family(info, PresetFamily::Membrane);
    if (lattice->domain().kind != DomainKind::HalfDisk) {
        throw std::invalid_argument("membrane presets need a half-disk lattice");
    }
    MembraneProblem m;
    if (name == "signorini") {
        const MembranePair ref = reference_signorini_pair(lambda_h, lambda_w, lattice);
        // Only curved-boundary values are read; start the interior from zero.
        m.data_h = ScalarField(lattice, 0.0);
        m.data_w = ScalarField(lattice, 0.0);
        for (std::size_t k = 0; k < lattice->spec().size(); ++k) {
            if (lattice->kind(k) != NodeKind::Boundary) continue;
            m.data_h[k] = ref.h[k];
            m.data_w[k] = ref.w[k];
        }
        m.has_reference = true;
        return m;
    }
    if (name == "transmission_symmetric") {
        auto f = [](double x, double y) { return std::exp(x) * std::cos(y) + 0.5 * y; };
        m.data_h = make_field(lattice, f);
        m.data_w = make_field(lattice, f);
        m.transmission = true;
        return m;
    }
    if (name == "transmission_mixed") {
        // a is harmonic and even in y, b harmonic and odd; Lh dh_b + Lw dw_b = 0 across the thin row.
        auto a = [](double x, double y) { return std::exp(x) * std::cos(y); };
        auto b = [](double x, double y) { return -std::exp(x) * std::sin(y); };
        m.data_h = make_field(lattice, [&](double x, double y) { return a(x, y) + lambda_w * b(x, y); });
        m.data_w = make_field(lattice, [&](double x, double y) { return a(x, y) - lambda_h * b(x, y); });
        m.transmission = true;
        return m;
    }
    m.data_h = make_field(lattice, [](double x, double y) { return 1.0 + 0.25 * x + 0.1 * y; });
    m.data_w = make_field(lattice, [](double x, double y) { return -1.0 + 0.25 * x - 0.1 * y * y; });
    return m;
}

}  // namespace bimembrane
