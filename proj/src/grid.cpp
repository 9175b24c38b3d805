#include "bimembrane/grid.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace bimembrane {

void GridSpec::validate() const {
    if (nx < 3 || ny < 3) {
        throw std::invalid_argument("grid: nx and ny must be at least 3");
    }
    if (!(h > 0.0) || !std::isfinite(h)) {
        throw std::invalid_argument("grid: spacing h must be positive");
    }
    if (!std::isfinite(x0) || !std::isfinite(y0)) {
        throw std::invalid_argument("grid: origin must be finite");
    }
}

GridSpec GridSpec::centered_square(double half_width, double h) {
    const int half = static_cast<int>(std::ceil(half_width / h - 1e-9));
    GridSpec spec{2 * half + 1, 2 * half + 1, h, -half * h, -half * h};
    spec.validate();
    return spec;
}

bool DomainSpec::contains(Point p) const {
    // Slack so nodes that sit on the analytic boundary are kept.
    constexpr double slack = 1e-12;
    switch (kind) {
    case DomainKind::Disk:
        return p.x * p.x + p.y * p.y <= radius * radius + slack;
    case DomainKind::HalfDisk:
        return p.y >= -slack && p.x * p.x + p.y * p.y <= radius * radius + slack;
    case DomainKind::Rectangle:
        return true;
    }
    return false;
}

double DomainSpec::distance_to_boundary(Point p, const GridSpec& spec) const {
    switch (kind) {
    case DomainKind::Disk:
        return radius - norm(p);
    case DomainKind::HalfDisk:
        return std::min(radius - norm(p), p.y);
    case DomainKind::Rectangle: {
        const double x1 = spec.x0 + (spec.nx - 1) * spec.h;
        const double y1 = spec.y0 + (spec.ny - 1) * spec.h;
        return std::min({p.x - spec.x0, x1 - p.x, p.y - spec.y0, y1 - p.y});
    }
    }
    return 0.0;
}

std::string to_string(DomainKind kind) {
    switch (kind) {
    case DomainKind::Disk:
        return "disk";
    case DomainKind::HalfDisk:
        return "half_disk";
    case DomainKind::Rectangle:
        return "rectangle";
    }
    return "rectangle";
}

DomainKind domain_kind_from_string(const std::string& s) {
    if (s == "disk") return DomainKind::Disk;
    if (s == "half_disk") return DomainKind::HalfDisk;
    if (s == "rectangle") return DomainKind::Rectangle;
    throw std::invalid_argument("unknown domain kind '" + s + "'");
}

Lattice::Lattice(GridSpec spec, DomainSpec domain) : spec_(spec), domain_(domain) {
    spec_.validate();
    mask_.assign(spec_.size(), 0);
    for (int j = 0; j < spec_.ny; ++j) {
        for (int i = 0; i < spec_.nx; ++i) {
            mask_[spec_.index(i, j)] = domain_.contains(spec_.node(i, j)) ? 1 : 0;
        }
    }
    classify();
}

Lattice::Lattice(GridSpec spec, DomainSpec domain, std::vector<std::uint8_t> mask)
    : spec_(spec), domain_(domain), mask_(std::move(mask)) {
    spec_.validate();
    if (mask_.size() != spec_.size()) {
        throw std::invalid_argument("lattice: mask size does not match grid");
    }
    classify();
}

void Lattice::classify() {
    kinds_.assign(spec_.size(), NodeKind::Outside);
    interior_count_ = 0;
    masked_count_ = 0;
    for (int j = 0; j < spec_.ny; ++j) {
        for (int i = 0; i < spec_.nx; ++i) {
            const std::size_t k = spec_.index(i, j);
            if (!mask_[k]) continue;
            ++masked_count_;
            const bool all = masked(i + 1, j) && masked(i - 1, j) && masked(i, j + 1) && masked(i, j - 1);
            kinds_[k] = all ? NodeKind::Interior : NodeKind::Boundary;
            if (all) ++interior_count_;
        }
    }
}

std::shared_ptr<const Lattice> Lattice::interior_lattice() const {
    std::vector<std::uint8_t> m(spec_.size(), 0);
    for (std::size_t k = 0; k < m.size(); ++k) m[k] = kinds_[k] == NodeKind::Interior ? 1 : 0;
    return std::make_shared<const Lattice>(spec_, domain_, std::move(m));
}

ScalarField::ScalarField(LatticePtr lattice, double fill) : lattice_(std::move(lattice)) {
    values_.assign(lattice_->spec().size(), kUnmasked);
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (lattice_->masked(k)) values_[k] = fill;
    }
}

ScalarField::ScalarField(LatticePtr lattice, std::vector<double> values)
    : lattice_(std::move(lattice)), values_(std::move(values)) {
    if (values_.size() != lattice_->spec().size()) {
        throw std::invalid_argument("field: value count does not match grid");
    }
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (!lattice_->masked(k)) {
            values_[k] = kUnmasked;
        } else if (!std::isfinite(values_[k])) {
            throw std::invalid_argument("field: non-finite value at a masked node");
        }
    }
}

double ScalarField::sup_norm() const {
    double m = 0.0;
    for (std::size_t k = 0; k < values_.size(); ++k) {
        if (lattice_->masked(k)) m = std::max(m, std::abs(values_[k]));
    }
    return m;
}

namespace {

struct CellLocation {
    int i;
    int j;
    double s;
    double t;
};

std::optional<CellLocation> locate(const GridSpec& spec, Point p) {
    const double fx = (p.x - spec.x0) / spec.h;
    const double fy = (p.y - spec.y0) / spec.h;
    if (!(fx >= -1e-9 && fy >= -1e-9 && fx <= spec.nx - 1 + 1e-9 && fy <= spec.ny - 1 + 1e-9)) {
        return std::nullopt;
    }
    int i = std::clamp(static_cast<int>(std::floor(fx)), 0, spec.nx - 2);
    int j = std::clamp(static_cast<int>(std::floor(fy)), 0, spec.ny - 2);
    return CellLocation{i, j, std::clamp(fx - i, 0.0, 1.0), std::clamp(fy - j, 0.0, 1.0)};
}

template <class Getter>
std::optional<double> bilinear(const Lattice& lat, Point p, Getter&& get) {
    const auto loc = locate(lat.spec(), p);
    if (!loc) return std::nullopt;
    const auto [i, j, s, t] = *loc;
    // A corner with zero weight may be unmasked (point on a cell edge).
    double acc = 0.0;
    const int di[4] = {0, 1, 0, 1};
    const int dj[4] = {0, 0, 1, 1};
    const double w[4] = {(1 - s) * (1 - t), s * (1 - t), (1 - s) * t, s * t};
    for (int c = 0; c < 4; ++c) {
        if (w[c] == 0.0) continue;
        const int ii = i + di[c];
        const int jj = j + dj[c];
        if (!lat.masked(ii, jj)) return std::nullopt;
        const double v = get(lat.spec().index(ii, jj));
        if (!std::isfinite(v)) return std::nullopt;
        acc += w[c] * v;
    }
    return acc;
}

}  // namespace

std::optional<double> ScalarField::sample(Point p) const {
    return bilinear(*lattice_, p, [&](std::size_t k) { return values_[k]; });
}

std::optional<Point> VectorField::sample(Point p) const {
    auto x = bilinear(*lattice, p, [&](std::size_t k) { return gx[k]; });
    auto y = bilinear(*lattice, p, [&](std::size_t k) { return gy[k]; });
    if (!x || !y) return std::nullopt;
    return Point{*x, *y};
}

ScalarField make_field(LatticePtr lattice, const Generator& generator) {
    ScalarField f(lattice, 0.0);
    const GridSpec& spec = lattice->spec();
    for (int j = 0; j < spec.ny; ++j) {
        for (int i = 0; i < spec.nx; ++i) {
            const std::size_t k = spec.index(i, j);
            if (!lattice->masked(k)) continue;
            const Point p = spec.node(i, j);
            f[k] = generator(p.x, p.y);
        }
    }
    return f;
}

ScalarField make_field(const GridSpec& spec, const Generator& generator, const DomainSpec& domain) {
    return make_field(Lattice::make(spec, domain), generator);
}

namespace {

// Derivative along one axis at node (i,j); step (di,dj) selects the axis.
double axis_derivative(const ScalarField& f, int i, int j, int di, int dj) {
    const Lattice& lat = f.lattice();
    const double h = lat.h();
    const bool plus = lat.masked(i + di, j + dj);
    const bool minus = lat.masked(i - di, j - dj);
    if (plus && minus) {
        return (f.at(i + di, j + dj) - f.at(i - di, j - dj)) / (2.0 * h);
    }
    if (plus && lat.masked(i + 2 * di, j + 2 * dj)) {
        return (-3.0 * f.at(i, j) + 4.0 * f.at(i + di, j + dj) - f.at(i + 2 * di, j + 2 * dj)) / (2.0 * h);
    }
    if (minus && lat.masked(i - 2 * di, j - 2 * dj)) {
        return (3.0 * f.at(i, j) - 4.0 * f.at(i - di, j - dj) + f.at(i - 2 * di, j - 2 * dj)) / (2.0 * h);
    }
    // Staircase tips with a single neighbor along the axis.
    if (plus) return (f.at(i + di, j + dj) - f.at(i, j)) / h;
    if (minus) return (f.at(i, j) - f.at(i - di, j - dj)) / h;
    return kUnmasked;
}

}  // namespace

VectorField gradient(const ScalarField& f) {
    const Lattice& lat = f.lattice();
    if (lat.interior_count() == 0) {
        throw std::invalid_argument("gradient: lattice has no interior node");
    }
    const GridSpec& spec = lat.spec();
    VectorField g{f.lattice_ptr(), std::vector<double>(spec.size(), kUnmasked),
                  std::vector<double>(spec.size(), kUnmasked)};
    for (int j = 0; j < spec.ny; ++j) {
        for (int i = 0; i < spec.nx; ++i) {
            const std::size_t k = spec.index(i, j);
            if (!lat.masked(k)) continue;
            g.gx[k] = axis_derivative(f, i, j, 1, 0);
            g.gy[k] = axis_derivative(f, i, j, 0, 1);
        }
    }
    return g;
}

ScalarField laplacian(const ScalarField& f) {
    const Lattice& lat = f.lattice();
    if (lat.interior_count() == 0) {
        throw std::invalid_argument("laplacian: lattice has no interior node");
    }
    const GridSpec& spec = lat.spec();
    const double inv_h2 = 1.0 / (spec.h * spec.h);
    ScalarField out(lat.interior_lattice(), 0.0);
    for (int j = 1; j + 1 < spec.ny; ++j) {
        for (int i = 1; i + 1 < spec.nx; ++i) {
            if (!lat.interior(i, j)) continue;
            out.at(i, j) =
                (f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1) - 4.0 * f.at(i, j)) * inv_h2;
        }
    }
    return out;
}

ScalarField blowup_rescale(const ScalarField& f, Point center, double r, LatticePtr out) {
    if (!(r > 0.0)) throw std::invalid_argument("blowup_rescale: radius must be positive");
    ScalarField g(out, 0.0);
    const GridSpec& os = out->spec();
    for (int j = 0; j < os.ny; ++j) {
        for (int i = 0; i < os.nx; ++i) {
            const std::size_t k = os.index(i, j);
            if (!out->masked(k)) continue;
            const Point x = os.node(i, j);
            const auto value = f.sample(center + r * x);
            if (!value) {
                throw std::domain_error("blowup_rescale: rescaled ball leaves the source domain");
            }
            g[k] = *value / r;
        }
    }
    return g;
}

double sup_distance(const ScalarField& a, const ScalarField& b) {
    if (!(a.spec() == b.spec())) throw std::invalid_argument("sup_distance: grids differ");
    double m = 0.0;
    for (std::size_t k = 0; k < a.values().size(); ++k) {
        if (a.lattice().masked(k) && b.lattice().masked(k)) m = std::max(m, std::abs(a[k] - b[k]));
    }
    return m;
}

}  // namespace bimembrane
