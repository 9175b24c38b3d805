#pragma once

#include "bimembrane/grid.hpp"

namespace bimembrane {

/// Phase weights. Must be positive and sum to one.
struct Params {
    double lambda_u = 0.5;
    double lambda_v = 0.5;

    /// Throws std::invalid_argument; `require_ordering` additionally asks for lambda_u >= lambda_v.
    void validate(bool require_ordering = false) const;
};

struct FieldPair {
    ScalarField u;
    ScalarField v;
    Params params;

    const Lattice& lattice() const { return u.lattice(); }
    const LatticePtr& lattice_ptr() const { return u.lattice_ptr(); }
    const GridSpec& spec() const { return u.spec(); }

    /// Checks shared lattice and (optionally) the ordering u >= v >= 0 at every masked node.
    void validate(bool check_ordering = true) const;
};

/// Two-phase plane solution u = sqrt(Lu) (x.nu)^+, v = sqrt(Lv) (x.nu)^+.
FieldPair reference_plane_pair(const Params& params, Point nu, LatticePtr lattice);
FieldPair reference_plane_pair(const Params& params, Point nu, const GridSpec& spec,
                               const DomainSpec& domain = DomainSpec::rectangle());

/// Sharp positivity threshold for a field: 1e-8 * max(1, |f|_inf).
double sharp_threshold(const ScalarField& f);

}  // namespace bimembrane
