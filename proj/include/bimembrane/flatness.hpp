#pragma once

#include <optional>
#include <vector>

#include "bimembrane/pair.hpp"

namespace bimembrane {

/// Plane sandwich Gu (x.nu - eps r)^+ <= u <= Gu (x.nu + eps r)^+ (same for v with Gv) on B_r(center).
struct FlatnessCertificate {
    Point center;
    double r = 0.0;
    Point nu{0.0, 1.0};
    double gamma_u = 0.0;
    double gamma_v = 0.0;
    /// Per unit radius; +inf when no admissible (nu, gamma_u) gives eps <= 1.
    double epsilon = 0.0;

    bool flat() const { return std::isfinite(epsilon); }
};

struct FlatnessOptions {
    /// Half-width of the angle bracket around the initial normal.
    double angle_bracket = 0.3;
    int coarse_angles = 25;
    int golden_iterations = 48;
    double gamma_lo = 0.2;
    double gamma_hi = 0.98;
    /// Initial normal; estimated from the u polyline through the center when absent.
    std::optional<Point> initial_normal;
};

/// Smallest sandwich width (absolute, not divided by r) for fixed (nu, gamma_u); nodes of B_r(center).
double sandwich_width(const FieldPair& pair, Point center, double r, Point nu, double gamma_u);

FlatnessCertificate measure_flatness(const FieldPair& pair, Point center, double r, const FlatnessOptions& opts = {});

/// Independent nodewise re-check of the certificate's sandwich (slack is absolute).
bool audit_certificate(const FieldPair& pair, const FlatnessCertificate& cert, double slack = 1e-12);

/// Normal of the u-level polyline through (or nearest to) `center`.
Point initial_flatness_normal(const FieldPair& pair, Point center, double window);

struct FlatnessTrace {
    std::vector<FlatnessCertificate> certificates;
    /// floor_flags[k]: epsilon_k < 2h / r_k.
    std::vector<bool> floor_flags;
    /// ratios[k] = eps_{k+1} / eps_k.
    std::vector<double> ratios;
    /// |nu_{k+1} - nu_k|.
    std::vector<double> normal_drift;
    /// Least-squares slope of log eps vs log r over flat rows above the floor (NaN with < 2 rows).
    double slope = 0.0;
    /// max over steps above the floor of ratio (<= 1 means decay); NaN when no such step.
    double max_ratio_above_floor = 0.0;
    /// max over steps of drift / eps_k (the constant C in |nu' - nu| <= C eps).
    double drift_constant = 0.0;
};

/// Radii must be strictly decreasing. Each radius starts its search from the previous normal.
FlatnessTrace flatness_decay_trace(const FieldPair& pair, Point center, const std::vector<double>& radii,
                                   const FlatnessOptions& opts = {});

}  // namespace bimembrane
