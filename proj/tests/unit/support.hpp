#pragma once

#include <random>

#include "bimembrane/grid.hpp"
#include "bimembrane/pair.hpp"

namespace testing {

using namespace bimembrane;

inline LatticePtr disk_lattice(double h, double radius = 1.0) {
    return Lattice::make(GridSpec::centered_square(radius, h), DomainSpec::disk(radius));
}

inline LatticePtr square_lattice(double h, double half = 1.0) {
    return Lattice::make(GridSpec::centered_square(half, h), DomainSpec::rectangle());
}

/// Fixed-seed generator so every property test is reproducible.
struct Rng {
    std::mt19937_64 engine;
    explicit Rng(std::uint64_t seed) : engine(seed) {}
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(engine); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine); }
};

}  // namespace testing
