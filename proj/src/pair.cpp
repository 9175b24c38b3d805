#include "bimembrane/pair.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bimembrane {

void Params::validate(bool require_ordering) const {
    if (!(lambda_u > 0.0) || !std::isfinite(lambda_u)) {
        throw std::invalid_argument("params.lambda_u must be positive");
    }
    if (!(lambda_v > 0.0) || !std::isfinite(lambda_v)) {
        throw std::invalid_argument("params.lambda_v must be positive");
    }
    if (std::abs(lambda_u + lambda_v - 1.0) > 1e-12) {
        std::ostringstream os;
        os.precision(17);
        os << "params.lambda_u + params.lambda_v must equal 1 (got " << lambda_u + lambda_v << ")";
        throw std::invalid_argument(os.str());
    }
    if (require_ordering && lambda_u < lambda_v) {
        throw std::invalid_argument("params.lambda_u must be >= params.lambda_v for the variational problem");
    }
}

void FieldPair::validate(bool check_ordering) const {
    params.validate();
    if (!(u.spec() == v.spec())) throw std::invalid_argument("pair: u and v live on different grids");
    const Lattice& lu = u.lattice();
    const Lattice& lv = v.lattice();
    for (std::size_t k = 0; k < u.spec().size(); ++k) {
        if (lu.masked(k) != lv.masked(k)) throw std::invalid_argument("pair: u and v masks differ");
    }
    if (!check_ordering) return;
    for (std::size_t k = 0; k < u.spec().size(); ++k) {
        if (!lu.masked(k)) continue;
        if (!(u[k] >= v[k] && v[k] >= 0.0)) {
            throw std::invalid_argument("pair: ordering u >= v >= 0 violated");
        }
    }
}

FieldPair reference_plane_pair(const Params& params, Point nu, LatticePtr lattice) {
    params.validate();
    const double n = norm(nu);
    if (!(n > 0.0)) throw std::invalid_argument("reference_plane_pair: zero normal");
    nu = (1.0 / n) * nu;
    const double gu = std::sqrt(params.lambda_u);
    const double gv = std::sqrt(params.lambda_v);
    auto u = make_field(lattice, [&](double x, double y) { return gu * std::max(0.0, x * nu.x + y * nu.y); });
    auto v = make_field(lattice, [&](double x, double y) { return gv * std::max(0.0, x * nu.x + y * nu.y); });
    return {std::move(u), std::move(v), params};
}

FieldPair reference_plane_pair(const Params& params, Point nu, const GridSpec& spec, const DomainSpec& domain) {
    return reference_plane_pair(params, nu, Lattice::make(spec, domain));
}

double sharp_threshold(const ScalarField& f) { return 1e-8 * std::max(1.0, f.sup_norm()); }

}  // namespace bimembrane
