#pragma once

#include <iosfwd>
#include <string>

#include "bimembrane/grid.hpp"

namespace bimembrane {

/// Raised for unreadable or malformed grid files.
class GridIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Text format:
///   nx ny h x0 y0
///   mask <disk|half_disk|rectangle> <radius>
///   ny rows of nx values (row j = 0 first), `nan` at unmasked nodes.
/// Values use 17 significant digits so a write/read cycle is bit-exact.
void write_grid(std::ostream& os, const ScalarField& f);
void write_grid(const std::string& path, const ScalarField& f);

/// The mask is taken from the `nan` pattern of the file, not recomputed from the domain.
ScalarField read_grid(std::istream& is);
ScalarField read_grid(const std::string& path);

/// %.17g formatting shared by every writer.
std::string format_double(double x);

}  // namespace bimembrane
