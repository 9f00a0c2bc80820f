#include "cslab/geometry.hpp"

#include <cmath>

namespace cslab {

Domain Domain::torus(int n, double period) {
    if (n < 1) throw InvalidState("Domain: dimension must be >= 1");
    if (!(period > 0.0)) throw InvalidState("Domain: period must be positive");
    Domain d;
    d.kind = Kind::Torus;
    d.dim = n;
    d.period = period;
    return d;
}

Domain Domain::open(int n) {
    if (n < 1) throw InvalidState("Domain: dimension must be >= 1");
    Domain d;
    d.kind = Kind::Open;
    d.dim = n;
    return d;
}

double wrap_coord(double x, double period) {
    double r = std::fmod(x, period);
    if (r < 0.0) r += period;
    // fmod is exact, but r + period can round up to period for tiny negatives
    if (r >= period) r = 0.0;
    return r;
}

double min_image_coord(double dx, double period) {
    double r = std::remainder(dx, period); // [-period/2, +period/2], exact
    if (r >= 0.5 * period) r -= period;    // tie at +period/2 -> -period/2
    return r;
}

Vec wrap_position(const Vec& x, const Domain& d) {
    if (static_cast<int>(x.size()) != d.dim)
        throw InvalidState("wrap_position: dimension mismatch");
    for (double c : x)
        if (!std::isfinite(c)) throw InvalidState("wrap_position: non-finite coordinate");
    if (!d.is_torus()) return x;
    Vec out(x.size());
    for (size_t k = 0; k < x.size(); ++k) out[k] = wrap_coord(x[k], d.period);
    return out;
}

Vec displacement(const Vec& x, const Vec& y, const Domain& d) {
    if (x.size() != y.size() || static_cast<int>(x.size()) != d.dim)
        throw InvalidState("displacement: dimension mismatch");
    Vec out(x.size());
    displacement_into(x.data(), y.data(), d.dim, d, out.data());
    return out;
}

double distance(const Vec& x, const Vec& y, const Domain& d) {
    if (x.size() != y.size() || static_cast<int>(x.size()) != d.dim)
        throw InvalidState("distance: dimension mismatch");
    return std::sqrt(distance2_flat(x.data(), y.data(), d.dim, d));
}

void displacement_into(const double* x, const double* y, int n, const Domain& d, double* out) {
    if (d.is_torus()) {
        for (int k = 0; k < n; ++k) out[k] = min_image_coord(x[k] - y[k], d.period);
    } else {
        for (int k = 0; k < n; ++k) out[k] = x[k] - y[k];
    }
}

double distance2_flat(const double* x, const double* y, int n, const Domain& d) {
    double s = 0.0;
    if (d.is_torus()) {
        for (int k = 0; k < n; ++k) {
            double c = min_image_coord(x[k] - y[k], d.period);
            s += c * c;
        }
    } else {
        for (int k = 0; k < n; ++k) {
            double c = x[k] - y[k];
            s += c * c;
        }
    }
    return s;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double norm2(std::span<const double> a) { return dot(a, a); }

double norm(std::span<const double> a) { return std::sqrt(norm2(a)); }

} // namespace cslab
