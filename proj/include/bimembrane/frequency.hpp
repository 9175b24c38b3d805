#pragma once

#include <vector>

#include "bimembrane/free_boundary.hpp"

namespace bimembrane {

struct FrequencyOptions {
    /// Truncation exponent: the frequency is taken of max(Htilde, r^(3 + sigma)).
    double sigma = 0.1;
    /// Exponent for the r^(1 + 3 beta) tail bound of the correction terms.
    double beta = 0.3;
    int min_angles = 64;
    /// Phases are the exact half-planes {x_N > 0} around the center and the correction
    /// terms vanish (used for planted profiles whose boundary is flat by construction).
    bool half_plane_phases = false;
};

struct FrequencyRow {
    double r = 0.0;
    double H = 0.0;
    double A = 0.0;
    double B = 0.0;
    double Htilde = 0.0;
    /// 2/r * sum over phases of Lambda |grad w|^2 on B_r.
    double dHtilde_bulk = 0.0;
    /// Difference quotient of Htilde along the trace.
    double dHtilde_diff = 0.0;
    double Ntilde = 0.0;
    /// True when the r^(3 + sigma) branch is active.
    bool truncated = false;
};

struct FrequencyTrace {
    Point center;
    Point nu{0.0, 1.0};
    double sigma = 0.1;
    double beta = 0.3;
    std::vector<FrequencyRow> rows;
    /// Bound on the omitted integral of |A + B| over (0, r_min), from C r^(1 + 3 beta).
    double tail_bound = 0.0;
    /// Free-boundary segments whose probes left the mask (excluded from A).
    int skipped_segments = 0;
};

struct WFields {
    ScalarField w_u;
    ScalarField w_v;
};

/// w_u = (u - sqrt(Lu) x_N) / sqrt(Lu) on {u > tau} (and analogously for v), x_N = (x - center).nu.
WFields w_fields(const FieldPair& pair, Point center, Point nu);

/// H(r) = r^(1-N) [ int_{u>0, dB_r} Lu w_u^2 + int_{v>0, dB_r} Lv w_v^2 ], N = 2.
double height(const FieldPair& pair, Point center, Point nu, double r, const FrequencyOptions& opts = {});
/// Same with an explicit number of trapezoid nodes on the circle.
double height_with_angles(const FieldPair& pair, Point center, Point nu, double r, int angles,
                          bool half_plane_phases = false);

/// Per-segment data of the free boundaries used by A(r) and B(r).
struct BoundaryQuadrature {
    struct Segment {
        Point a;
        Point b;
        /// Inner normal of the free boundary on this segment.
        Point normal;
        double lambda = 0.0;
        /// Lambda w d_nu w at the midpoint (NaN when the probe left the mask).
        double flux = 0.0;
    };
    std::vector<Segment> segments;
    int skipped = 0;
};

BoundaryQuadrature prepare_boundary_quadrature(const FieldPair& pair, const BoundarySet& boundary, Point center,
                                               Point nu);

/// (A(r), B(r)) from prepared boundary data.
std::pair<double, double> correction_terms(const BoundaryQuadrature& q, Point center, Point nu, double r);
std::pair<double, double> correction_terms(const FieldPair& pair, Point center, Point nu, double r,
                                           const BoundarySet& boundary);

/// 2/r * int_{B_r} (Lu |grad w_u|^2 + Lv |grad w_v|^2), edge quadrature with a one-cell radial taper.
double bulk_height_derivative(const FieldPair& pair, Point center, Point nu, double r, bool half_plane_phases = false);

/// Rows through Htilde and both derivative estimates. Radii must be strictly increasing.
FrequencyTrace modified_height_trace(const FieldPair& pair, Point center, Point nu, const std::vector<double>& radii,
                                     const BoundarySet& boundary, const FrequencyOptions& opts = {});

/// Completes Ntilde and the truncation flags.
void truncated_frequency(FrequencyTrace& trace);

/// Both steps; `boundary` may be empty in half-plane mode.
FrequencyTrace frequency_trace(const FieldPair& pair, Point center, Point nu, const std::vector<double>& radii,
                               const BoundarySet& boundary, const FrequencyOptions& opts = {});

/// Geometric radii with ratio 0.85 from r_max down to max(6h, 0.02), returned increasing.
std::vector<double> default_frequency_radii(double h, double r_max = 0.45);

struct MonotonicityReport {
    /// Smallest grid constant making (1 + C r^sigma) Ntilde nondecreasing; +inf when none.
    double C = 0.0;
    std::vector<double> C_grid;
};

/// Default grid: 61 log-spaced values in [1e-3, 1e3].
MonotonicityReport monotonicity_report(const FrequencyTrace& trace, std::vector<double> C_grid = {},
                                       double slack = 1e-3);

struct LowerBoundReport {
    double min_Ntilde = 0.0;
    double tolerance = 0.1;
    std::size_t rows_used = 0;
    bool passed = false;
    /// No non-truncated rows.
    bool vacuous = false;
};

LowerBoundReport lower_bound_check(const FrequencyTrace& trace, double tol = 0.1);

struct CubicHeightReport {
    double slope = 0.0;
    std::size_t rows_used = 0;
    double floor_radius = 0.0;
    bool passed = false;
};

/// Log-log slope of Htilde over non-truncated rows with r >= floor_radius; throws with fewer than 4 rows.
/// With include_truncated, rows below r^(3 + sigma) enter the fit as well.
CubicHeightReport cubic_height_check(const FrequencyTrace& trace, double floor_radius, double threshold = 2.7,
                                     bool include_truncated = false);

/// Smallest (r/2) dHtilde_diff / Htilde over rows with r >= floor_radius and Htilde > 0, whichever
/// truncation branch is active (+inf when no row qualifies).
double untruncated_frequency_min(const FrequencyTrace& trace, double floor_radius);

/// min over non-truncated rows of dHtilde_bulk / r^(2 + sigma) (+inf when none).
double derivative_floor(const FrequencyTrace& trace);

/// Fit C, p of |X(r)| <= C r^p style data: least-squares slope of log|X| vs log r over rows with X != 0.
double loglog_slope(const std::vector<double>& r, const std::vector<double>& x);

struct HomogeneityEstimate {
    std::vector<double> radii;
    std::vector<double> lambda;
    /// Linear fit in r evaluated at r = 0.
    double extrapolated = 0.0;
};

/// Almgren quotient r int_{B_r+} |grad f|^2 / int_{dB_r+} f^2 on the upper half-ball around
/// `center`; the thin row y = center.y carries half-weight horizontal edges.
HomogeneityEstimate estimate_homogeneity(const ScalarField& f, Point center, const std::vector<double>& radii);

/// Planted profile: u = sqrt(Lu) (x_N + a r^lambda cos(lambda theta)), v likewise, on x_N >= 0
/// around the origin with nu = e_y, zero below. `amplitude` a.
FieldPair planted_profile_pair(const Params& params, LatticePtr lattice, double lambda, double amplitude);

/// Amplitude that keeps every radius >= r_min above the truncation r^(3 + sigma).
double planted_amplitude(double lambda, double r_min, double sigma);

}  // namespace bimembrane
