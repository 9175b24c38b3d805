#include "bimembrane/flatness.hpp"

#include <algorithm>
#include <cmath>

#include "bimembrane/free_boundary.hpp"

namespace bimembrane {

namespace {

struct BallNode {
    Point x;  // relative to center
    double u;
    double v;
};

struct Ball {
    std::vector<BallNode> nodes;
    double tau_u;
    double tau_v;
};

Ball collect(const FieldPair& pair, Point center, double r) {
    const GridSpec& s = pair.spec();
    const Lattice& lat = pair.lattice();
    Ball ball{{}, sharp_threshold(pair.u), sharp_threshold(pair.v)};
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            const std::size_t k = s.index(i, j);
            if (!lat.masked(k)) continue;
            const Point x = s.node(i, j) - center;
            if (norm(x) > r) continue;
            ball.nodes.push_back({x, pair.u[k], pair.v[k]});
        }
    }
    if (ball.nodes.empty()) throw std::invalid_argument("flatness: ball contains no masked node");
    return ball;
}

double width(const Ball& ball, Point nu, double gu) {
    const double gv = std::sqrt(std::max(0.0, 1.0 - gu * gu));
    double e = 0.0;
    for (const BallNode& n : ball.nodes) {
        const double t = dot(n.x, nu);
        const double su = n.u / gu;
        e = std::max(e, t - su);
        if (n.u > ball.tau_u) e = std::max(e, su - t);
        const double sv = n.v / gv;
        e = std::max(e, t - sv);
        if (n.v > ball.tau_v) e = std::max(e, sv - t);
    }
    return e;
}

constexpr double kGolden = 0.6180339887498949;

template <class F>
std::pair<double, double> golden_min(F&& f, double a, double b, int iterations) {
    double c = b - kGolden * (b - a);
    double d = a + kGolden * (b - a);
    double fc = f(c);
    double fd = f(d);
    for (int it = 0; it < iterations; ++it) {
        if (fc <= fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - kGolden * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + kGolden * (b - a);
            fd = f(d);
        }
    }
    // Compare the final interior point with both bracket ends.
    std::pair<double, double> best = fc <= fd ? std::pair{c, fc} : std::pair{d, fd};
    for (double x : {a, b}) {
        const double fx = f(x);
        if (fx < best.second) best = {x, fx};
    }
    return best;
}

struct GammaFit {
    double gamma;
    double width;
};

GammaFit best_gamma(const Ball& ball, Point nu, const FlatnessOptions& o) {
    auto [g, w] = golden_min([&](double gu) { return width(ball, nu, gu); }, o.gamma_lo, o.gamma_hi,
                             o.golden_iterations);
    return {g, w};
}

}  // namespace

double sandwich_width(const FieldPair& pair, Point center, double r, Point nu, double gamma_u) {
    return width(collect(pair, center, r), nu, gamma_u);
}

Point initial_flatness_normal(const FieldPair& pair, Point center, double window) {
    const auto lines = extract_polylines(pair.u, sharp_threshold(pair.u));
    double best = std::numeric_limits<double>::infinity();
    const Polyline* nearest = nullptr;
    for (const Polyline& line : lines) {
        const double d = distance_to_polylines({line}, center);
        if (d < best) {
            best = d;
            nearest = &line;
        }
    }
    if (!nearest) return {0.0, 1.0};
    try {
        return estimate_normal(*nearest, center, window);
    } catch (const std::invalid_argument&) {
        return {0.0, 1.0};
    }
}

FlatnessCertificate measure_flatness(const FieldPair& pair, Point center, double r, const FlatnessOptions& opts) {
    if (!(r > 0.0)) throw std::invalid_argument("measure_flatness: radius must be positive");
    const double reach = pair.lattice().domain().distance_to_boundary(center, pair.spec());
    if (r > reach + 1e-12) throw std::invalid_argument("measure_flatness: ball leaves the domain");
    const Ball ball = collect(pair, center, r);
    const Point n0 = opts.initial_normal ? *opts.initial_normal
                                         : initial_flatness_normal(pair, center, 5.0 * pair.spec().h);
    const double theta0 = std::atan2(n0.y, n0.x);

    auto objective = [&](double theta) { return best_gamma(ball, unit_from_angle(theta), opts).width; };

    const int m = std::max(3, opts.coarse_angles);
    const double step = 2.0 * opts.angle_bracket / (m - 1);
    int best_k = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (int k = 0; k < m; ++k) {
        const double val = objective(theta0 - opts.angle_bracket + k * step);
        if (val < best_val) {
            best_val = val;
            best_k = k;
        }
    }
    const double center_angle = theta0 - opts.angle_bracket + best_k * step;
    const double lo = std::max(theta0 - opts.angle_bracket, center_angle - step);
    const double hi = std::min(theta0 + opts.angle_bracket, center_angle + step);
    auto [theta, w] = golden_min(objective, lo, hi, opts.golden_iterations);
    if (best_val < w) {
        theta = center_angle;
        w = best_val;
    }

    FlatnessCertificate cert;
    cert.center = center;
    cert.r = r;
    cert.nu = unit_from_angle(theta);
    const GammaFit g = best_gamma(ball, cert.nu, opts);
    cert.gamma_u = g.gamma;
    cert.gamma_v = std::sqrt(1.0 - g.gamma * g.gamma);
    cert.epsilon = g.width / r;
    if (cert.epsilon > 1.0) cert.epsilon = std::numeric_limits<double>::infinity();
    return cert;
}

bool audit_certificate(const FieldPair& pair, const FlatnessCertificate& cert, double slack) {
    if (!cert.flat()) return true;
    if (std::abs(cert.gamma_u * cert.gamma_u + cert.gamma_v * cert.gamma_v - 1.0) > 1e-12) return false;
    const double e = cert.epsilon * cert.r;
    const GridSpec& s = pair.spec();
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            const std::size_t k = s.index(i, j);
            if (!pair.lattice().masked(k)) continue;
            const Point x = s.node(i, j) - cert.center;
            if (norm(x) > cert.r) continue;
            const double t = dot(x, cert.nu);
            for (int f = 0; f < 2; ++f) {
                const double g = f == 0 ? cert.gamma_u : cert.gamma_v;
                const double val = f == 0 ? pair.u[k] : pair.v[k];
                const double lower = g * std::max(0.0, t - e);
                const double upper = g * std::max(0.0, t + e);
                if (val < lower - slack || val > upper + slack) {
                    // Values at or below the sharp threshold count as zero.
                    const double tau = sharp_threshold(f == 0 ? pair.u : pair.v);
                    if (!(val <= tau && val >= lower - slack)) return false;
                }
            }
        }
    }
    return true;
}

FlatnessTrace flatness_decay_trace(const FieldPair& pair, Point center, const std::vector<double>& radii,
                                   const FlatnessOptions& opts) {
    for (std::size_t k = 1; k < radii.size(); ++k) {
        if (!(radii[k] < radii[k - 1])) throw std::invalid_argument("flatness_decay_trace: radii must decrease");
    }
    FlatnessTrace trace;
    const double h = pair.spec().h;
    FlatnessOptions o = opts;
    if (!o.initial_normal) o.initial_normal = initial_flatness_normal(pair, center, 5.0 * h);
    for (double r : radii) {
        FlatnessCertificate c = measure_flatness(pair, center, r, o);
        if (c.flat()) o.initial_normal = c.nu;
        trace.floor_flags.push_back(c.epsilon < 2.0 * h / r);
        trace.certificates.push_back(c);
    }
    double max_ratio = std::numeric_limits<double>::quiet_NaN();
    double drift_c = 0.0;
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < trace.certificates.size(); ++k) {
        const auto& c = trace.certificates[k];
        if (c.flat() && !trace.floor_flags[k] && c.epsilon > 0.0) {
            lx.push_back(std::log(c.r));
            ly.push_back(std::log(c.epsilon));
        }
        if (k + 1 == trace.certificates.size()) break;
        const auto& d = trace.certificates[k + 1];
        const double ratio = d.epsilon / c.epsilon;
        trace.ratios.push_back(ratio);
        const double drift = norm(d.nu - c.nu);
        trace.normal_drift.push_back(drift);
        if (c.flat() && c.epsilon > 0.0) drift_c = std::max(drift_c, drift / c.epsilon);
        if (!trace.floor_flags[k + 1] && !trace.floor_flags[k]) {
            max_ratio = std::isnan(max_ratio) ? ratio : std::max(max_ratio, ratio);
        }
    }
    trace.max_ratio_above_floor = max_ratio;
    trace.drift_constant = drift_c;
    if (lx.size() >= 2) {
        const double n = static_cast<double>(lx.size());
        double mx = 0, my = 0;
        for (std::size_t k = 0; k < lx.size(); ++k) {
            mx += lx[k] / n;
            my += ly[k] / n;
        }
        double sxy = 0, sxx = 0;
        for (std::size_t k = 0; k < lx.size(); ++k) {
            sxy += (lx[k] - mx) * (ly[k] - my);
            sxx += (lx[k] - mx) * (lx[k] - mx);
        }
        trace.slope = sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
    } else {
        trace.slope = std::numeric_limits<double>::quiet_NaN();
    }
    return trace;
}

}  // namespace bimembrane
