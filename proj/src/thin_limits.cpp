#include "bimembrane/thin_limits.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bimembrane {

namespace {

enum class Mode { TwoMembrane, Transmission };

void check_inputs(const ScalarField& a, const ScalarField& b, double lh, double lw) {
    if (!(a.spec() == b.spec())) throw std::invalid_argument("thin limits: data grids differ");
    if (!(lh > 0.0) || !(lw > 0.0)) throw std::invalid_argument("thin limits: lambdas must be positive");
    const Lattice& lat = a.lattice();
    for (std::size_t k = 0; k < lat.spec().size(); ++k) {
        if (!lat.masked(k)) continue;
        if (!std::isfinite(a[k]) || !std::isfinite(b[k])) throw std::invalid_argument("thin limits: data not finite");
    }
}

double sor_omega(const GridSpec& s) {
    const int cells = std::max(2, std::max(s.nx, s.ny) - 1);
    return 2.0 / (1.0 + std::sin(M_PI / cells));
}

// Lexicographic sweep, or red-black when threads > 0.
template <class Body>
void sweep(const GridSpec& s, int threads, Body&& body) {
    if (threads <= 0) {
        for (int j = 0; j < s.ny; ++j) {
            for (int i = 0; i < s.nx; ++i) body(i, j);
        }
        return;
    }
    for (int color = 0; color < 2; ++color) {
#ifdef BIMEMBRANE_HAVE_OPENMP
#pragma omp parallel for num_threads(threads) schedule(static)
#endif
        for (int j = 0; j < s.ny; ++j) {
            for (int i = (j + color) & 1; i < s.nx; i += 2) body(i, j);
        }
    }
}

// Value minimizing the local energy at (i, j): 5-point average inside, ghost-reflected on the thin row.
double star(const ScalarField& f, int i, int j, bool thin) {
    if (thin) return 0.25 * (f.at(i + 1, j) + f.at(i - 1, j) + 2.0 * f.at(i, j + 1));
    return 0.25 * (f.at(i + 1, j) + f.at(i - 1, j) + f.at(i, j + 1) + f.at(i, j - 1));
}

MembranePair run(const ScalarField& data_h, const ScalarField& data_w, double lh, double lw, Mode mode,
                 const ThinOptions& opts) {
    check_inputs(data_h, data_w, lh, lw);
    const Lattice& lat = data_h.lattice();
    const GridSpec& s = lat.spec();
    MembranePair p{data_h, data_w, lh, lw};
    const double omega = sor_omega(s);
    const double sum = lh + lw;
    if (mode == Mode::Transmission) {
        // Start from a common trace.
        for (int i = 0; i < s.nx; ++i) {
            if (!thin_free(lat, i, 0)) continue;
            const double t = (lh * p.h.at(i, 0) + lw * p.w.at(i, 0)) / sum;
            p.h.at(i, 0) = t;
            p.w.at(i, 0) = t;
        }
    }
    for (int it = 1; it <= opts.max_sweeps; ++it) {
        double residual = 0.0;
        sweep(s, opts.threads, [&](int i, int j) {
            const bool thin = j == 0 && thin_free(lat, i, j);
            if (!thin && lat.kind(s.index(i, j)) != NodeKind::Interior) return;
            double& h = p.h.at(i, j);
            double& w = p.w.at(i, j);
            const double sh = star(p.h, i, j, thin);
            const double sw = star(p.w, i, j, thin);
            if (!thin) {
                residual = std::max({residual, std::abs(sh - h), std::abs(sw - w)});
                h += omega * (sh - h);
                w += omega * (sw - w);
                return;
            }
            if (mode == Mode::Transmission) {
                const double t = (lh * sh + lw * sw) / sum;
                residual = std::max(residual, std::abs(t - h));
                const double next = h + omega * (t - h);
                h = next;
                w = next;
                return;
            }
            // In (h - w, Lh h + Lw w) coordinates the local energy is diagonal and the
            // constraint is a box, so over-relaxation followed by projection stays monotone.
            double nh = h + omega * (sh - h);
            double nw = w + omega * (sw - w);
            if (nh < nw) {
                const double t = (lh * nh + lw * nw) / sum;
                nh = t;
                nw = t;
            }
            // Residual of the projected Gauss-Seidel map (without over-relaxation).
            double gh = sh;
            double gw = sw;
            if (gh < gw) gh = gw = (lh * sh + lw * sw) / sum;
            residual = std::max({residual, std::abs(gh - h), std::abs(gw - w)});
            h = nh;
            w = nw;
        });
        p.sweeps = it;
        p.residual = residual;
        if (residual <= opts.tol) {
            p.converged = true;
            return p;
        }
    }
    if (opts.throw_on_cap) throw std::runtime_error("thin limits: no convergence within iteration cap");
    return p;
}

}  // namespace

LatticePtr half_disk_lattice(double h) {
    if (!(h > 0.0)) throw std::invalid_argument("half_disk_lattice: spacing must be positive");
    const double n_real = 1.0 / h;
    const int n = static_cast<int>(std::lround(n_real));
    if (n < 2 || std::abs(n_real - n) > 1e-9 * n_real) {
        throw std::invalid_argument("half_disk_lattice: 1/h must be an integer >= 2");
    }
    GridSpec spec{2 * n + 1, n + 1, 1.0 / n, -1.0, 0.0};
    return std::make_shared<const Lattice>(spec, DomainSpec::half_disk(1.0));
}

bool on_thin_row(const Lattice& lat, int j) {
    return std::abs(lat.spec().y0 + j * lat.spec().h) < 1e-12;
}

bool thin_free(const Lattice& lat, int i, int j) {
    if (!on_thin_row(lat, j) || !lat.masked(i, j)) return false;
    return lat.masked(i + 1, j) && lat.masked(i - 1, j) && lat.masked(i, j + 1);
}

MembranePair solve_two_membrane(const ScalarField& data_h, const ScalarField& data_w, double lambda_h,
                                double lambda_w, const ThinOptions& opts) {
    return run(data_h, data_w, lambda_h, lambda_w, Mode::TwoMembrane, opts);
}

MembranePair solve_transmission(const ScalarField& data_h, const ScalarField& data_w, double lambda_h,
                                double lambda_w, const ThinOptions& opts) {
    return run(data_h, data_w, lambda_h, lambda_w, Mode::Transmission, opts);
}

ScalarField solve_neumann_harmonic(const ScalarField& data, const ThinOptions& opts) {
    // Two uncoupled copies; with equal data the constraint never binds.
    return run(data, data, 0.5, 0.5, Mode::TwoMembrane, opts).h;
}

MembranePair reference_signorini_pair(double lambda_h, double lambda_w, LatticePtr lattice) {
    if (!(lambda_h > 0.0) || !(lambda_w > 0.0)) throw std::invalid_argument("reference pair: lambdas must be positive");
    const ScalarField w1 = make_field(lattice, [](double x, double y) {
        const double r = std::hypot(x, y);
        const double theta = std::atan2(std::max(y, 0.0), x);
        return std::pow(r, 1.5) * std::cos(1.5 * theta);
    });
    const ScalarField w2(lattice, 0.0);
    MembranePair p = recombine_membranes(w1, w2, lambda_h, lambda_w);
    p.converged = true;
    return p;
}

std::pair<ScalarField, ScalarField> split_membranes(const MembranePair& pair) {
    ScalarField w1 = pair.h;
    ScalarField w2 = pair.h;
    const Lattice& lat = pair.h.lattice();
    for (std::size_t k = 0; k < lat.spec().size(); ++k) {
        if (!lat.masked(k)) continue;
        w1[k] = pair.h[k] - pair.w[k];
        w2[k] = pair.lambda_h * pair.h[k] + pair.lambda_w * pair.w[k];
    }
    return {std::move(w1), std::move(w2)};
}

MembranePair recombine_membranes(const ScalarField& w1, const ScalarField& w2, double lambda_h, double lambda_w) {
    if (!(w1.spec() == w2.spec())) throw std::invalid_argument("recombine_membranes: grids differ");
    const double sum = lambda_h + lambda_w;
    ScalarField h = w1;
    ScalarField w = w1;
    const Lattice& lat = w1.lattice();
    for (std::size_t k = 0; k < lat.spec().size(); ++k) {
        if (!lat.masked(k)) continue;
        h[k] = (w2[k] + lambda_w * w1[k]) / sum;
        w[k] = (w2[k] - lambda_h * w1[k]) / sum;
    }
    return {std::move(h), std::move(w), lambda_h, lambda_w};
}

double membrane_energy(const MembranePair& pair) {
    const Lattice& lat = pair.h.lattice();
    const GridSpec& s = lat.spec();
    double acc = 0.0;
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            if (!lat.masked(i, j)) continue;
            for (int dir = 0; dir < 2; ++dir) {
                const int ii = i + (dir == 0 ? 1 : 0);
                const int jj = j + (dir == 1 ? 1 : 0);
                if (!lat.masked(ii, jj)) continue;
                const double weight = dir == 0 && on_thin_row(lat, j) ? 0.5 : 1.0;
                const double dh = pair.h.at(ii, jj) - pair.h.at(i, j);
                const double dw = pair.w.at(ii, jj) - pair.w.at(i, j);
                acc += weight * (pair.lambda_h * dh * dh + pair.lambda_w * dw * dw);
            }
        }
    }
    return acc;
}

ComplementarityAudit complementarity_audit(const MembranePair& pair) {
    const Lattice& lat = pair.h.lattice();
    const GridSpec& s = lat.spec();
    ComplementarityAudit audit;
    for (int j = 0; j < s.ny; ++j) {
        if (!on_thin_row(lat, j)) continue;
        for (int i = 0; i < s.nx; ++i) {
            if (!thin_free(lat, i, j)) continue;
            // Ghost reflection: d_N f = (E + W + 2N - 4C) / (2h), inner normal e_y.
            auto dn = [&](const ScalarField& f) {
                return (f.at(i + 1, j) + f.at(i - 1, j) + 2.0 * f.at(i, j + 1) - 4.0 * f.at(i, j)) / (2.0 * s.h);
            };
            ComplementarityRow row;
            row.x = s.node(i, j).x;
            row.gap = pair.h.at(i, j) - pair.w.at(i, j);
            row.dn_h = dn(pair.h);
            row.dn_w = dn(pair.w);
            row.res_h = std::abs(std::min(row.gap, -row.dn_h));
            row.res_w = std::abs(std::min(row.gap, row.dn_w));
            row.flux = std::abs(pair.lambda_h * row.dn_h + pair.lambda_w * row.dn_w);
            audit.max_residual = std::max({audit.max_residual, row.res_h, row.res_w, row.flux});
            audit.rows.push_back(row);
        }
    }
    return audit;
}

}  // namespace bimembrane
