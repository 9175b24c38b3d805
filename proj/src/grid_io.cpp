#include "bimembrane/grid_io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace bimembrane {

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_grid(std::ostream& os, const ScalarField& f) {
    const GridSpec& s = f.spec();
    const DomainSpec& d = f.lattice().domain();
    os << s.nx << ' ' << s.ny << ' ' << format_double(s.h) << ' ' << format_double(s.x0) << ' '
       << format_double(s.y0) << '\n';
    os << "mask " << to_string(d.kind) << ' ' << format_double(d.radius) << '\n';
    for (int j = 0; j < s.ny; ++j) {
        for (int i = 0; i < s.nx; ++i) {
            if (i) os << ' ';
            const std::size_t k = s.index(i, j);
            os << (f.lattice().masked(k) ? format_double(f[k]) : std::string("nan"));
        }
        os << '\n';
    }
    if (!os) throw GridIoError("grid write failed");
}

void write_grid(const std::string& path, const ScalarField& f) {
    std::ofstream os(path);
    if (!os) throw GridIoError("cannot open '" + path + "' for writing");
    write_grid(os, f);
}

namespace {

double parse_double(const std::string& tok, const char* what) {
    errno = 0;
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str() || *end != '\0') {
        throw GridIoError(std::string("grid file: bad ") + what + " '" + tok + "'");
    }
    return x;
}

}  // namespace

ScalarField read_grid(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw GridIoError("grid file: missing header");
    GridSpec spec;
    {
        std::istringstream hs(line);
        std::string h, x0, y0;
        if (!(hs >> spec.nx >> spec.ny >> h >> x0 >> y0)) throw GridIoError("grid file: malformed header");
        spec.h = parse_double(h, "spacing");
        spec.x0 = parse_double(x0, "origin");
        spec.y0 = parse_double(y0, "origin");
    }
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw GridIoError(std::string("grid file: ") + e.what());
    }
    if (!std::getline(is, line)) throw GridIoError("grid file: missing mask line");
    DomainSpec domain;
    {
        std::istringstream ms(line);
        std::string tag, kind, radius;
        if (!(ms >> tag >> kind >> radius) || tag != "mask") throw GridIoError("grid file: malformed mask line");
        try {
            domain.kind = domain_kind_from_string(kind);
        } catch (const std::invalid_argument& e) {
            throw GridIoError(std::string("grid file: ") + e.what());
        }
        domain.radius = parse_double(radius, "radius");
    }
    std::vector<double> values(spec.size());
    std::vector<std::uint8_t> mask(spec.size());
    std::string tok;
    for (std::size_t k = 0; k < spec.size(); ++k) {
        if (!(is >> tok)) throw GridIoError("grid file: truncated value block");
        const double x = parse_double(tok, "value");
        mask[k] = std::isnan(x) ? 0 : 1;
        values[k] = x;
        if (mask[k] && !std::isfinite(x)) throw GridIoError("grid file: non-finite value");
    }
    if (is >> tok) throw GridIoError("grid file: trailing data");
    auto lattice = std::make_shared<const Lattice>(spec, domain, std::move(mask));
    return ScalarField(lattice, std::move(values));
}

ScalarField read_grid(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw GridIoError("cannot open '" + path + "'");
    return read_grid(is);
}

}  // namespace bimembrane
