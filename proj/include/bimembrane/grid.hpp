#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace bimembrane {

struct Point {
    double x = 0.0;
    double y = 0.0;

    friend Point operator+(Point a, Point b) { return {a.x + b.x, a.y + b.y}; }
    friend Point operator-(Point a, Point b) { return {a.x - b.x, a.y - b.y}; }
    friend Point operator*(double s, Point a) { return {s * a.x, s * a.y}; }
    friend bool operator==(Point a, Point b) = default;
};

inline double dot(Point a, Point b) { return a.x * b.x + a.y * b.y; }
inline double norm(Point a) { return std::hypot(a.x, a.y); }
inline double distance(Point a, Point b) { return norm(a - b); }
inline Point unit_from_angle(double theta) { return {std::cos(theta), std::sin(theta)}; }

constexpr double kUnmasked = std::numeric_limits<double>::quiet_NaN();

/// Node lattice: node (i,j) sits at origin + (i*h, j*h); nx, ny are node counts.
struct GridSpec {
    int nx = 0;
    int ny = 0;
    double h = 0.0;
    double x0 = 0.0;
    double y0 = 0.0;

    void validate() const;
    std::size_t size() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx) + static_cast<std::size_t>(i);
    }
    Point node(int i, int j) const { return {x0 + i * h, y0 + j * h}; }
    bool contains_index(int i, int j) const { return i >= 0 && j >= 0 && i < nx && j < ny; }

    /// Square grid with spacing h covering [-half_width, half_width]^2 (node-aligned at the origin).
    static GridSpec centered_square(double half_width, double h);

    friend bool operator==(const GridSpec&, const GridSpec&) = default;
};

enum class DomainKind { Disk, HalfDisk, Rectangle };

/// Computational domain. Disks are centered at the physical origin; the half disk keeps y >= 0.
struct DomainSpec {
    DomainKind kind = DomainKind::Rectangle;
    double radius = 0.0;

    static DomainSpec disk(double r) { return {DomainKind::Disk, r}; }
    static DomainSpec half_disk(double r) { return {DomainKind::HalfDisk, r}; }
    static DomainSpec rectangle() { return {DomainKind::Rectangle, 0.0}; }

    bool contains(Point p) const;
    /// Distance from p to the domain boundary (for the rectangle, pass the grid).
    double distance_to_boundary(Point p, const GridSpec& spec) const;

    friend bool operator==(const DomainSpec&, const DomainSpec&) = default;
};

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& s);

enum class NodeKind : std::uint8_t { Outside, Boundary, Interior };

/// Grid + mask, shared immutably between the fields sampled on it.
class Lattice {
public:
    Lattice(GridSpec spec, DomainSpec domain);
    Lattice(GridSpec spec, DomainSpec domain, std::vector<std::uint8_t> mask);

    static std::shared_ptr<const Lattice> make(GridSpec spec, DomainSpec domain) {
        return std::make_shared<const Lattice>(spec, domain);
    }

    const GridSpec& spec() const { return spec_; }
    const DomainSpec& domain() const { return domain_; }
    double h() const { return spec_.h; }

    bool masked(std::size_t k) const { return mask_[k] != 0; }
    bool masked(int i, int j) const { return spec_.contains_index(i, j) && mask_[spec_.index(i, j)] != 0; }
    NodeKind kind(std::size_t k) const { return kinds_[k]; }
    bool interior(int i, int j) const {
        return spec_.contains_index(i, j) && kinds_[spec_.index(i, j)] == NodeKind::Interior;
    }
    std::span<const std::uint8_t> mask() const { return mask_; }
    std::size_t interior_count() const { return interior_count_; }
    std::size_t masked_count() const { return masked_count_; }

    /// Lattice whose mask is the interior nodes of this one.
    std::shared_ptr<const Lattice> interior_lattice() const;

private:
    void classify();

    GridSpec spec_;
    DomainSpec domain_;
    std::vector<std::uint8_t> mask_;
    std::vector<NodeKind> kinds_;
    std::size_t interior_count_ = 0;
    std::size_t masked_count_ = 0;
};

using LatticePtr = std::shared_ptr<const Lattice>;

/// Real function sampled at the masked nodes of a lattice; unmasked nodes hold NaN.
class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(LatticePtr lattice, double fill = 0.0);
    ScalarField(LatticePtr lattice, std::vector<double> values);

    const Lattice& lattice() const { return *lattice_; }
    const LatticePtr& lattice_ptr() const { return lattice_; }
    const GridSpec& spec() const { return lattice_->spec(); }

    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    double at(int i, int j) const { return values_[spec().index(i, j)]; }
    double& at(int i, int j) { return values_[spec().index(i, j)]; }

    std::span<const double> values() const { return values_; }
    std::span<double> values() { return values_; }

    /// Max |value| over masked nodes.
    double sup_norm() const;
    /// Bilinear interpolation; empty when the containing cell has an unmasked corner.
    std::optional<double> sample(Point p) const;

private:
    LatticePtr lattice_;
    std::vector<double> values_;
};

struct VectorField {
    LatticePtr lattice;
    std::vector<double> gx;
    std::vector<double> gy;

    std::optional<Point> sample(Point p) const;
};

using Generator = std::function<double(double, double)>;

ScalarField make_field(LatticePtr lattice, const Generator& generator);
ScalarField make_field(const GridSpec& spec, const Generator& generator, const DomainSpec& domain);

/// Central differences at nodes with both neighbors masked, second-order one-sided otherwise,
/// first-order when only one neighbor exists along the axis. NaN for nodes with no neighbor.
VectorField gradient(const ScalarField& f);

/// 5-point Laplacian on the interior nodes (result lives on the interior lattice).
ScalarField laplacian(const ScalarField& f);

/// out(x) = f(center + r x) / r, sampled on `out` by bilinear interpolation.
ScalarField blowup_rescale(const ScalarField& f, Point center, double r, LatticePtr out);

double sup_distance(const ScalarField& a, const ScalarField& b);

}  // namespace bimembrane
