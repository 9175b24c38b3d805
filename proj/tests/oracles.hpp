#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "bimembrane/energy.hpp"

namespace oracles {

/// Nearest point to (a, b) on the ray t * d, t in [0, t_max], by dense sampling followed
/// by golden-section refinement in the best sampling cell.
inline std::pair<double, double> ray_nearest(double a, double b, double dx, double dy, double t_max) {
    auto dist2 = [&](double t) { return (a - t * dx) * (a - t * dx) + (b - t * dy) * (b - t * dy); };
    const int n = 4000;
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= n; ++k) {
        const double d = dist2(t_max * k / n);
        if (d < best_d) {
            best_d = d;
            best = k;
        }
    }
    double lo = t_max * std::max(0, best - 1) / n;
    double hi = t_max * std::min(n, best + 1) / n;
    const double g = 0.6180339887498949;
    for (int it = 0; it < 80; ++it) {
        const double c = hi - g * (hi - lo);
        const double d = lo + g * (hi - lo);
        if (dist2(c) <= dist2(d)) {
            hi = d;
        } else {
            lo = c;
        }
    }
    const double t = 0.5 * (lo + hi);
    return {t * dx, t * dy};
}

/// Projection onto {a >= b >= 0}: the point itself when admissible, otherwise the nearest
/// sampled point on the two edges of the wedge.
inline std::pair<double, double> dense_cone_projection(double a, double b) {
    if (a >= b && b >= 0.0) return {a, b};
    const double t_max = 2.0 * std::hypot(a, b) + 1.0;
    const double s = 1.0 / std::sqrt(2.0);
    const auto p = ray_nearest(a, b, 1.0, 0.0, t_max);
    const auto q = ray_nearest(a, b, s, s, t_max);
    auto d = [&](std::pair<double, double> x) { return std::hypot(a - x.first, b - x.second); };
    return d(p) <= d(q) ? p : q;
}

/// Directional derivative of the smoothed energy by a central difference quotient.
inline double fd_directional(const bimembrane::FieldPair& pair, const bimembrane::FieldPair& dir,
                             const bimembrane::SmoothingSpec& sm, double eps) {
    bimembrane::FieldPair plus = pair;
    bimembrane::FieldPair minus = pair;
    for (std::size_t k = 0; k < pair.spec().size(); ++k) {
        if (!pair.lattice().masked(k)) continue;
        plus.u[k] += eps * dir.u[k];
        plus.v[k] += eps * dir.v[k];
        minus.u[k] -= eps * dir.u[k];
        minus.v[k] -= eps * dir.v[k];
    }
    return (bimembrane::smoothed_energy(plus, sm) - bimembrane::smoothed_energy(minus, sm)) / (2.0 * eps);
}

}  // namespace oracles
