#include "bimembrane/free_boundary.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <unordered_map>

namespace bimembrane {

std::string to_string(Phase p) {
    switch (p) {
    case Phase::OnePhaseU:
        return "one_phase_u";
    case Phase::OnePhaseV:
        return "one_phase_v";
    case Phase::TwoPhase:
        return "two_phase";
    }
    return "two_phase";
}

namespace {

struct Segment {
    std::int64_t edge[2];
    Point p[2];
};

// Edge ids: horizontal edge (i,j)-(i+1,j) -> 2k, vertical edge (i,j)-(i,j+1) -> 2k+1, k = j*nx+i.
std::int64_t horizontal_id(const GridSpec& s, int i, int j) {
    return 2 * static_cast<std::int64_t>(s.index(i, j));
}
std::int64_t vertical_id(const GridSpec& s, int i, int j) {
    return 2 * static_cast<std::int64_t>(s.index(i, j)) + 1;
}

Point crossing(const ScalarField& f, double level, int i0, int j0, int i1, int j1) {
    const double a = f.at(i0, j0);
    const double b = f.at(i1, j1);
    const Point p0 = f.spec().node(i0, j0);
    const Point p1 = f.spec().node(i1, j1);
    // A clipped endpoint (exactly 0) carries no position information; extrapolate the
    // positive side linearly from its next node on the same grid line when possible.
    if ((a == 0.0) != (b == 0.0)) {
        const bool a_zero = a == 0.0;
        const int ui = a_zero ? i1 : i0;
        const int uj = a_zero ? j1 : j0;
        const int fi = 2 * ui - (a_zero ? i0 : i1);
        const int fj = 2 * uj - (a_zero ? j0 : j1);
        const double up = a_zero ? b : a;
        if (f.lattice().masked(fi, fj)) {
            const double far = f.at(fi, fj);
            if (far > up) {
                const double t = std::clamp((up - level) / (far - up), 0.0, 1.0);
                const Point pu = a_zero ? p1 : p0;
                const Point pz = a_zero ? p0 : p1;
                return pu + t * (pz - pu);
            }
        }
    }
    const double t = std::clamp((level - a) / (b - a), 0.0, 1.0);
    return p0 + t * (p1 - p0);
}

std::vector<Segment> march(const ScalarField& f, double level) {
    const Lattice& lat = f.lattice();
    const GridSpec& s = lat.spec();
    std::vector<Segment> segs;
    for (int j = 0; j + 1 < s.ny; ++j) {
        for (int i = 0; i + 1 < s.nx; ++i) {
            if (!(lat.masked(i, j) && lat.masked(i + 1, j) && lat.masked(i + 1, j + 1) && lat.masked(i, j + 1))) {
                continue;
            }
            const double c[4] = {f.at(i, j), f.at(i + 1, j), f.at(i + 1, j + 1), f.at(i, j + 1)};
            int code = 0;
            for (int q = 0; q < 4; ++q) code |= (c[q] > level ? 1 : 0) << q;
            if (code == 0 || code == 15) continue;

            // Edges: 0 bottom, 1 right, 2 top, 3 left.
            const std::array<std::int64_t, 4> eid = {horizontal_id(s, i, j), vertical_id(s, i + 1, j),
                                                     horizontal_id(s, i, j + 1), vertical_id(s, i, j)};
            auto point = [&](int e) {
                switch (e) {
                case 0:
                    return crossing(f, level, i, j, i + 1, j);
                case 1:
                    return crossing(f, level, i + 1, j, i + 1, j + 1);
                case 2:
                    return crossing(f, level, i, j + 1, i + 1, j + 1);
                default:
                    return crossing(f, level, i, j, i, j + 1);
                }
            };
            auto add = [&](int a, int b) { segs.push_back({{eid[a], eid[b]}, {point(a), point(b)}}); };
            const bool center_above = 0.25 * (c[0] + c[1] + c[2] + c[3]) > level;
            switch (code) {
            case 1: add(3, 0); break;
            case 2: add(0, 1); break;
            case 3: add(3, 1); break;
            case 4: add(1, 2); break;
            case 5:
                if (center_above) {
                    add(0, 1);
                    add(2, 3);
                } else {
                    add(3, 0);
                    add(1, 2);
                }
                break;
            case 6: add(0, 2); break;
            case 7: add(3, 2); break;
            case 8: add(2, 3); break;
            case 9: add(0, 2); break;
            case 10:
                if (center_above) {
                    add(3, 0);
                    add(1, 2);
                } else {
                    add(0, 1);
                    add(2, 3);
                }
                break;
            case 11: add(1, 2); break;
            case 12: add(1, 3); break;
            case 13: add(0, 1); break;
            case 14: add(3, 0); break;
            default: break;
            }
        }
    }
    return segs;
}

void orient(Polyline& line, const ScalarField& f) {
    const double eps = 0.5 * f.spec().h;
    int votes = 0;
    for (std::size_t k = 0; k + 1 < line.vertices.size(); ++k) {
        const Point a = line.vertices[k];
        const Point b = line.vertices[k + 1];
        const Point d = b - a;
        const double len = norm(d);
        if (len == 0.0) continue;
        const Point left{-d.y / len, d.x / len};
        const Point m = 0.5 * (a + b);
        const auto fp = f.sample(m + eps * left);
        const auto fm = f.sample(m - eps * left);
        if (!fp || !fm || *fp == *fm) continue;
        votes += *fp > *fm ? 1 : -1;
    }
    if (votes < 0) std::reverse(line.vertices.begin(), line.vertices.end());
}

}  // namespace

std::vector<Polyline> extract_polylines(const ScalarField& f, double level) {
    const std::vector<Segment> segs = march(f, level);
    std::unordered_map<std::int64_t, std::array<int, 2>> by_edge;
    by_edge.reserve(segs.size() * 2);
    for (int k = 0; k < static_cast<int>(segs.size()); ++k) {
        for (int e = 0; e < 2; ++e) {
            auto [it, fresh] = by_edge.try_emplace(segs[k].edge[e], std::array<int, 2>{-1, -1});
            auto& slot = it->second;
            (slot[0] < 0 ? slot[0] : slot[1]) = k;
        }
    }
    auto other = [&](std::int64_t edge, int seg) {
        const auto& slot = by_edge.at(edge);
        return slot[0] == seg ? slot[1] : slot[0];
    };

    std::vector<char> used(segs.size(), 0);
    std::vector<Polyline> lines;
    auto walk = [&](int start, int start_end) {
        // start_end: the endpoint of `start` that begins the chain.
        Polyline line;
        int seg = start;
        int from = start_end;
        line.vertices.push_back(segs[seg].p[from]);
        while (seg >= 0 && !used[seg]) {
            used[seg] = 1;
            const int to = 1 - from;
            line.vertices.push_back(segs[seg].p[to]);
            const std::int64_t edge = segs[seg].edge[to];
            const int next = other(edge, seg);
            if (next < 0) break;
            if (used[next]) {
                if (next == start) line.closed = true;
                break;
            }
            from = segs[next].edge[0] == edge ? 0 : 1;
            seg = next;
        }
        orient(line, f);
        lines.push_back(std::move(line));
    };
    // Open chains first (they start at an edge owned by a single segment), then loops.
    for (int k = 0; k < static_cast<int>(segs.size()); ++k) {
        if (used[k]) continue;
        for (int e = 0; e < 2; ++e) {
            if (other(segs[k].edge[e], k) < 0) {
                walk(k, e);
                break;
            }
        }
    }
    for (int k = 0; k < static_cast<int>(segs.size()); ++k) {
        if (!used[k]) walk(k, 0);
    }
    return lines;
}

Point estimate_normal(const Polyline& polyline, Point location, double window) {
    double sx = 0.0, sy = 0.0;
    std::size_t n = 0;
    const std::size_t count = polyline.closed && polyline.vertices.size() > 1 ? polyline.vertices.size() - 1
                                                                               : polyline.vertices.size();
    for (std::size_t k = 0; k < count; ++k) {
        const Point p = polyline.vertices[k];
        if (distance(p, location) <= window) {
            sx += p.x;
            sy += p.y;
            ++n;
        }
    }
    if (n < 3) throw std::invalid_argument("estimate_normal: fewer than 3 polyline vertices within window");
    const Point mean{sx / n, sy / n};
    double cxx = 0.0, cxy = 0.0, cyy = 0.0;
    for (std::size_t k = 0; k < count; ++k) {
        const Point p = polyline.vertices[k];
        if (distance(p, location) > window) continue;
        const Point d = p - mean;
        cxx += d.x * d.x;
        cxy += d.x * d.y;
        cyy += d.y * d.y;
    }
    // Principal axis of the 2x2 covariance.
    const double theta = 0.5 * std::atan2(2.0 * cxy, cxx - cyy);
    Point dir = unit_from_angle(theta);

    // Align with the local traversal direction of the nearest segment.
    double best = std::numeric_limits<double>::infinity();
    Point local{1.0, 0.0};
    for (std::size_t k = 0; k + 1 < polyline.vertices.size(); ++k) {
        const Point a = polyline.vertices[k];
        const Point b = polyline.vertices[k + 1];
        const double d = distance(0.5 * (a + b), location);
        if (d < best && !(a == b)) {
            best = d;
            local = b - a;
        }
    }
    if (dot(dir, local) < 0.0) dir = -1.0 * dir;
    return {-dir.y, dir.x};
}

namespace {

double segment_distance(Point p, Point a, Point b) {
    const Point d = b - a;
    const double len2 = dot(d, d);
    const double t = len2 > 0.0 ? std::clamp(dot(p - a, d) / len2, 0.0, 1.0) : 0.0;
    return distance(p, a + t * d);
}

}  // namespace

double distance_to_polylines(const std::vector<Polyline>& polylines, Point p) {
    double best = std::numeric_limits<double>::infinity();
    for (const Polyline& line : polylines) {
        for (std::size_t k = 0; k + 1 < line.vertices.size(); ++k) {
            best = std::min(best, segment_distance(p, line.vertices[k], line.vertices[k + 1]));
        }
    }
    return best;
}

double boundary_gradient(const ScalarField& field, Point location, Point normal, double probe) {
    const auto value = field.sample(location + probe * normal);
    if (!value) throw std::domain_error("boundary_gradient: probe point outside the mask");
    return *value / probe;
}

double boundary_gradient(const ScalarField& field, const FreeBoundarySample& sample, double probe) {
    return boundary_gradient(field, sample.location, sample.normal, probe);
}

double boundary_gradient_extrapolated(const ScalarField& field, Point location, Point normal) {
    const double h = field.spec().h;
    return 2.0 * boundary_gradient(field, location, normal, 2.0 * h) -
           boundary_gradient(field, location, normal, 4.0 * h);
}

double bernoulli_residual(const Params& params, const FreeBoundarySample& s) {
    switch (s.phase) {
    case Phase::OnePhaseU:
        return std::abs(s.grad_u * s.grad_u - params.lambda_u);
    case Phase::OnePhaseV:
        return std::abs(s.grad_v * s.grad_v - params.lambda_v);
    case Phase::TwoPhase:
        return std::abs(s.grad_u * s.grad_u + s.grad_v * s.grad_v - 1.0);
    }
    return 0.0;
}

namespace {

double probe_slope(const ScalarField& f, Point loc, Point n, const BoundaryOptions& opts) {
    try {
        if (opts.probe > 0.0) return boundary_gradient(f, loc, n, opts.probe);
        return boundary_gradient_extrapolated(f, loc, n);
    } catch (const std::domain_error&) {
        return std::numeric_limits<double>::quiet_NaN();
    }
}

void add_samples(BoundarySet& set, const FieldPair& pair, int source, const BoundaryOptions& opts,
                 const VectorField* grad_u) {
    const double h = pair.spec().h;
    const double window = opts.normal_window > 0.0 ? opts.normal_window : 5.0 * h;
    const auto& own = source == 0 ? set.polyline_u : set.polyline_v;
    const auto& partner = source == 0 ? set.polyline_v : set.polyline_u;
    for (int l = 0; l < static_cast<int>(own.size()); ++l) {
        const Polyline& line = own[l];
        for (int k = 0; k + 1 < static_cast<int>(line.vertices.size()); ++k) {
            const Point a = line.vertices[k];
            const Point b = line.vertices[k + 1];
            FreeBoundarySample s;
            s.location = 0.5 * (a + b);
            s.source = source;
            s.polyline = l;
            s.segment = k;
            try {
                s.normal = estimate_normal(line, s.location, window);
            } catch (const std::invalid_argument&) {
                const Point d = b - a;
                const double len = norm(d);
                s.normal = len > 0.0 ? Point{-d.y / len, d.x / len} : Point{0.0, 1.0};
            }
            const bool paired = distance_to_polylines(partner, s.location) <= opts.kappa * h;
            if (paired) {
                s.phase = Phase::TwoPhase;
                s.grad_u = probe_slope(pair.u, s.location, s.normal, opts);
                s.grad_v = probe_slope(pair.v, s.location, s.normal, opts);
            } else if (source == 0) {
                s.phase = Phase::OnePhaseU;
                s.grad_u = probe_slope(pair.u, s.location, s.normal, opts);
                s.grad_v = 0.0;
            } else {
                s.phase = Phase::OnePhaseV;
                s.grad_v = probe_slope(pair.v, s.location, s.normal, opts);
                const auto g = grad_u->sample(s.location);
                s.grad_u = g ? norm(*g) : std::numeric_limits<double>::quiet_NaN();
            }
            s.residual = bernoulli_residual(pair.params, s);
            set.samples.push_back(s);
        }
    }
}

}  // namespace

BoundarySet extract_boundaries(const FieldPair& pair, const BoundaryOptions& opts) {
    pair.validate(false);
    BoundarySet set;
    set.polyline_u = extract_polylines(pair.u, sharp_threshold(pair.u));
    set.polyline_v = extract_polylines(pair.v, sharp_threshold(pair.v));
    const VectorField grad_u = gradient(pair.u);
    add_samples(set, pair, 0, opts, &grad_u);
    add_samples(set, pair, 1, opts, &grad_u);
    return set;
}

std::pair<ScalarField, ScalarField> competitor_fields(const FieldPair& pair) {
    const double su = std::sqrt(pair.params.lambda_u);
    const double sv = std::sqrt(pair.params.lambda_v);
    ScalarField m(pair.lattice_ptr(), 0.0);
    ScalarField q(pair.lattice_ptr(), 0.0);
    const Lattice& lat = pair.lattice();
    for (std::size_t k = 0; k < lat.spec().size(); ++k) {
        if (!lat.masked(k)) continue;
        m[k] = std::hypot(pair.u[k], pair.v[k]);
        q[k] = su * pair.u[k] + sv * pair.v[k];
    }
    return {std::move(m), std::move(q)};
}

ProportionalityFit proportionality_fit(const FieldPair& pair, Point center, double r) {
    const GridSpec& s = pair.spec();
    if (r < 8.0 * s.h * (1.0 - 1e-12)) throw std::invalid_argument("proportionality_fit: radius below 8h");
    const double tau = sharp_threshold(pair.v);
    const Lattice& lat = pair.lattice();
    double uv = 0.0, vv = 0.0, uu = 0.0;
    std::vector<std::size_t> nodes;
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            const std::size_t k = s.index(i, j);
            if (!lat.masked(k) || !(pair.v[k] > tau) || distance(s.node(i, j), center) > r) continue;
            uv += pair.u[k] * pair.v[k];
            vv += pair.v[k] * pair.v[k];
            uu += pair.u[k] * pair.u[k];
            nodes.push_back(k);
        }
    }
    if (nodes.empty()) throw std::domain_error("proportionality_fit: no node with v > tau in the ball");
    ProportionalityFit fit;
    fit.c = uv / vv;
    fit.nodes = nodes.size();
    double res = 0.0;
    for (std::size_t k : nodes) {
        const double d = pair.u[k] - fit.c * pair.v[k];
        res += d * d;
    }
    fit.rel_residual = std::sqrt(res / uu);
    return fit;
}

double ball_sup(const ScalarField& f, Point center, double r) {
    const GridSpec& s = f.spec();
    const int i0 = std::max(0, static_cast<int>(std::floor((center.x - r - s.x0) / s.h)));
    const int i1 = std::min(s.nx - 1, static_cast<int>(std::ceil((center.x + r - s.x0) / s.h)));
    const int j0 = std::max(0, static_cast<int>(std::floor((center.y - r - s.y0) / s.h)));
    const int j1 = std::min(s.ny - 1, static_cast<int>(std::ceil((center.y + r - s.y0) / s.h)));
    double m = -std::numeric_limits<double>::infinity();
    for (int j = j0; j <= j1; ++j) {
        for (int i = i0; i <= i1; ++i) {
            if (!f.lattice().masked(i, j) || distance(s.node(i, j), center) > r) continue;
            m = std::max(m, f.at(i, j));
        }
    }
    return m;
}

NondegeneracyTable nondegeneracy_scan(const FieldPair& pair, const BoundarySet& boundary,
                                      const std::vector<double>& radii) {
    NondegeneracyTable table;
    const GridSpec& s = pair.spec();
    const DomainSpec& domain = pair.lattice().domain();
    for (std::size_t n = 0; n < boundary.samples.size(); ++n) {
        const FreeBoundarySample& sample = boundary.samples[n];
        const double reach = domain.distance_to_boundary(sample.location, s);
        for (double r : radii) {
            if (r < 4.0 * s.h * (1.0 - 1e-12) || r > reach) continue;
            NondegeneracyRow row{n, r, ball_sup(pair.u, sample.location, r) / r,
                                 ball_sup(pair.v, sample.location, r) / r};
            double relevant = 0.0;
            switch (sample.phase) {
            case Phase::OnePhaseU:
                relevant = row.ratio_u;
                break;
            case Phase::OnePhaseV:
                relevant = row.ratio_v;
                break;
            case Phase::TwoPhase:
                relevant = std::min(row.ratio_u, row.ratio_v);
                break;
            }
            table.min_ratio = std::min(table.min_ratio, relevant);
            table.rows.push_back(row);
        }
    }
    return table;
}

ScalarField signed_extension(const ScalarField& f) {
    const Lattice& lat = f.lattice();
    const GridSpec& s = lat.spec();
    ScalarField out = f;
    const int di[4] = {1, -1, 0, 0};
    const int dj[4] = {0, 0, 1, -1};
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            if (!lat.masked(i, j) || f.at(i, j) != 0.0) continue;
            double acc = 0.0;
            int n = 0;
            for (int d = 0; d < 4; ++d) {
                const int pi = i + di[d];
                const int pj = j + dj[d];
                const int fi = pi + di[d];
                const int fj = pj + dj[d];
                if (!lat.masked(pi, pj) || !lat.masked(fi, fj)) continue;
                const double p = f.at(pi, pj);
                const double q = f.at(fi, fj);
                if (p > 0.0 && q > p) {
                    acc += 2.0 * p - q;
                    ++n;
                }
            }
            if (n > 0) out.at(i, j) = std::min(0.0, acc / n);
        }
    }
    return out;
}

}  // namespace bimembrane
