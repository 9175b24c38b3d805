#include "bimembrane/energy.hpp"

#include <algorithm>
#include <cmath>

namespace bimembrane {

void SmoothingSpec::validate() const {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("smoothing delta must be positive");
}

double SmoothingSpec::step(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= delta) return 1.0;
    const double s = t / delta;
    switch (kind) {
    case SmoothingKind::Concave:
        return s * (2.0 - s);
    case SmoothingKind::Cubic:
        return s * s * (3.0 - 2.0 * s);
    }
    return 0.0;
}

double SmoothingSpec::slope(double t) const {
    if (t <= 0.0 || t >= delta) return 0.0;
    const double s = t / delta;
    switch (kind) {
    case SmoothingKind::Concave:
        return 2.0 * (1.0 - s) / delta;
    case SmoothingKind::Cubic:
        return 6.0 * s * (1.0 - s) / delta;
    }
    return 0.0;
}

std::string to_string(SmoothingKind kind) { return kind == SmoothingKind::Concave ? "concave" : "cubic"; }

SmoothingKind smoothing_kind_from_string(const std::string& s) {
    if (s == "concave") return SmoothingKind::Concave;
    if (s == "cubic") return SmoothingKind::Cubic;
    throw std::invalid_argument("unknown smoothing kind '" + s + "'");
}

double dirichlet_energy(const ScalarField& f) {
    const Lattice& lat = f.lattice();
    const GridSpec& s = lat.spec();
    double acc = 0.0;
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            if (!lat.masked(i, j)) continue;
            const double c = f.at(i, j);
            if (lat.masked(i + 1, j)) {
                const double d = f.at(i + 1, j) - c;
                acc += d * d;
            }
            if (lat.masked(i, j + 1)) {
                const double d = f.at(i, j + 1) - c;
                acc += d * d;
            }
        }
    }
    return acc;
}

namespace {

struct Measures {
    double smoothed = 0.0;
    double sharp = 0.0;
};

Measures measures(const ScalarField& f, const SmoothingSpec& sm) {
    const double tau = sharp_threshold(f);
    const double h2 = f.spec().h * f.spec().h;
    Measures m;
    for (std::size_t k = 0; k < f.spec().size(); ++k) {
        if (!f.lattice().masked(k)) continue;
        m.smoothed += sm.step(f[k]);
        if (f[k] > tau) m.sharp += 1.0;
    }
    m.smoothed *= h2;
    m.sharp *= h2;
    return m;
}

double smoothed_measure(const ScalarField& f, const SmoothingSpec& sm) {
    double acc = 0.0;
    for (std::size_t k = 0; k < f.spec().size(); ++k) {
        if (f.lattice().masked(k)) acc += sm.step(f[k]);
    }
    return acc * f.spec().h * f.spec().h;
}

}  // namespace

EnergyReport energy(const FieldPair& pair, const SmoothingSpec& smoothing) {
    smoothing.validate();
    EnergyReport r;
    r.dirichlet_u = dirichlet_energy(pair.u);
    r.dirichlet_v = dirichlet_energy(pair.v);
    const double lu = pair.params.lambda_u;
    const double lv = pair.params.lambda_v;
    const Measures mu = measures(pair.u, smoothing.for_phase(lu));
    const Measures mv = measures(pair.v, smoothing.for_phase(lv));
    r.measure_u = lu * mu.sharp;
    r.measure_v = lv * mv.sharp;
    r.measure_u_smoothed = lu * mu.smoothed;
    r.measure_v_smoothed = lv * mv.smoothed;
    r.total_sharp = r.dirichlet_u + r.dirichlet_v + r.measure_u + r.measure_v;
    r.total_smoothed = r.dirichlet_u + r.dirichlet_v + r.measure_u_smoothed + r.measure_v_smoothed;
    return r;
}

double smoothed_energy(const FieldPair& pair, const SmoothingSpec& smoothing) {
    return dirichlet_energy(pair.u) + dirichlet_energy(pair.v) +
           pair.params.lambda_u * smoothed_measure(pair.u, smoothing.for_phase(pair.params.lambda_u)) +
           pair.params.lambda_v * smoothed_measure(pair.v, smoothing.for_phase(pair.params.lambda_v));
}

namespace {

ScalarField variation(const ScalarField& f, double lambda, const SmoothingSpec& sm) {
    const Lattice& lat = f.lattice();
    const GridSpec& s = lat.spec();
    const double inv_h2 = 1.0 / (s.h * s.h);
    ScalarField g(f.lattice_ptr(), 0.0);
    for (int j = 1; j + 1 < s.ny; ++j) {
        for (int i = 1; i + 1 < s.nx; ++i) {
            if (!lat.interior(i, j)) continue;
            const double lap =
                (f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1) - 4.0 * f.at(i, j)) * inv_h2;
            g.at(i, j) = -2.0 * lap + lambda * sm.slope(f.at(i, j));
        }
    }
    return g;
}

}  // namespace

std::pair<ScalarField, ScalarField> first_variation(const FieldPair& pair, const SmoothingSpec& smoothing) {
    smoothing.validate();
    const double lu = pair.params.lambda_u;
    const double lv = pair.params.lambda_v;
    return {variation(pair.u, lu, smoothing.for_phase(lu)), variation(pair.v, lv, smoothing.for_phase(lv))};
}

double pair_inner(const std::pair<ScalarField, ScalarField>& a, const std::pair<ScalarField, ScalarField>& b) {
    const Lattice& lat = a.first.lattice();
    double acc = 0.0;
    for (std::size_t k = 0; k < lat.spec().size(); ++k) {
        if (!lat.masked(k)) continue;
        acc += a.first[k] * b.first[k] + a.second[k] * b.second[k];
    }
    return acc * lat.h() * lat.h();
}

std::pair<double, double> project_cone(double a, double b) {
    if (a >= b && b >= 0.0) return {a, b};
    if (b > a && a + b >= 0.0) {
        const double m = 0.5 * (a + b);
        return {m, m};
    }
    if (a >= 0.0 && b < 0.0) return {a, 0.0};
    return {0.0, 0.0};
}

void project_pair_inplace(FieldPair& pair) {
    const Lattice& lat = pair.lattice();
    for (std::size_t k = 0; k < lat.spec().size(); ++k) {
        if (!lat.masked(k)) continue;
        const auto [a, b] = project_cone(pair.u[k], pair.v[k]);
        pair.u[k] = a;
        pair.v[k] = b;
    }
}

FieldPair project_pair(const FieldPair& pair) {
    FieldPair out = pair;
    project_pair_inplace(out);
    return out;
}

}  // namespace bimembrane
