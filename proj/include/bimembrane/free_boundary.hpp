#pragma once

#include <vector>

#include "bimembrane/pair.hpp"

namespace bimembrane {

enum class Phase { OnePhaseU, OnePhaseV, TwoPhase };

std::string to_string(Phase p);

/// Chain of marching-squares segments, oriented so the positive side lies to the left.
struct Polyline {
    std::vector<Point> vertices;
    bool closed = false;

    std::size_t segment_count() const {
        return vertices.size() < 2 ? 0 : vertices.size() - 1;
    }
};

struct FreeBoundarySample {
    Point location;
    Phase phase = Phase::OnePhaseU;
    /// Inner normal (toward the positivity set of the field whose polyline holds the sample).
    Point normal{0.0, 1.0};
    double grad_u = 0.0;
    double grad_v = 0.0;
    /// NaN when the probes leave the mask (sample too close to the domain boundary).
    double residual = 0.0;
    /// 0: sample lies on a u polyline; 1: on a v polyline.
    int source = 0;
    int polyline = 0;
    int segment = 0;
};

struct BoundarySet {
    std::vector<FreeBoundarySample> samples;
    std::vector<Polyline> polyline_u;
    std::vector<Polyline> polyline_v;
};

struct BoundaryOptions {
    double kappa = 1.5;
    /// Zero means 5h.
    double normal_window = 0.0;
    /// Zero means Richardson extrapolation from probes 2h and 4h; otherwise a single probe.
    double probe = 0.0;
};

/// Marching squares on the `level` set of f over cells whose four corners are masked.
/// Saddle cells are resolved by the sign of the cell average.
std::vector<Polyline> extract_polylines(const ScalarField& f, double level);

BoundarySet extract_boundaries(const FieldPair& pair, const BoundaryOptions& opts = {});

/// Least-squares line through the polyline vertices within `window` of `location`,
/// returned as the unit normal on the positive (left) side. Throws with fewer than 3 vertices.
Point estimate_normal(const Polyline& polyline, Point location, double window);

/// Distance from p to the nearest segment of any of the polylines (+inf when empty).
double distance_to_polylines(const std::vector<Polyline>& polylines, Point p);

/// One-sided slope f(location + probe n) / probe. Throws std::domain_error when the probe leaves the mask.
double boundary_gradient(const ScalarField& field, Point location, Point normal, double probe);
double boundary_gradient(const ScalarField& field, const FreeBoundarySample& sample, double probe);
/// Richardson combination 2 s(2h) - s(4h) of the one-sided slopes.
double boundary_gradient_extrapolated(const ScalarField& field, Point location, Point normal);

double bernoulli_residual(const Params& params, const FreeBoundarySample& sample);

/// m = sqrt(u^2 + v^2), q = sqrt(Lu) u + sqrt(Lv) v.
std::pair<ScalarField, ScalarField> competitor_fields(const FieldPair& pair);

struct ProportionalityFit {
    double c = 0.0;
    double rel_residual = 0.0;
    std::size_t nodes = 0;
};

/// Least-squares u ~ c v over masked nodes of B_r(center) with v above the sharp threshold.
ProportionalityFit proportionality_fit(const FieldPair& pair, Point center, double r);

struct NondegeneracyRow {
    std::size_t sample = 0;
    double r = 0.0;
    double ratio_u = 0.0;
    double ratio_v = 0.0;
};

struct NondegeneracyTable {
    std::vector<NondegeneracyRow> rows;
    /// Minimum of the ratio relevant to each sample's phase (u for OnePhaseU, v for OnePhaseV, both for TwoPhase).
    double min_ratio = std::numeric_limits<double>::infinity();
};

/// Radii outside [4h, dist(sample, domain boundary)] are skipped for that sample.
NondegeneracyTable nondegeneracy_scan(const FieldPair& pair, const BoundarySet& boundary,
                                      const std::vector<double>& radii);

/// sup of f over masked nodes in B_r(center).
double ball_sup(const ScalarField& f, Point center, double r);

/// Copy of a nonnegative field whose zero nodes next to the positive set hold the linear
/// extrapolation of the positive side (averaged over grid directions, so negative), letting
/// bilinear sampling and level tests see a sub-cell free boundary.
ScalarField signed_extension(const ScalarField& f);

}  // namespace bimembrane
