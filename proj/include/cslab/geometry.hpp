#pragma once
#include <span>
#include <vector>

#include "cslab/errors.hpp"

namespace cslab {

inline constexpr double kTwoPi = 6.28318530717958647692528676655900577;

using Vec = std::vector<double>;

/// Flat torus [0, period)^n or open space R^n. The period is the same in
/// every coordinate and defaults to 2*pi.
struct Domain {
    enum class Kind { Torus, Open };

    Kind kind = Kind::Open;
    int dim = 1;
    double period = kTwoPi;

    static Domain torus(int n, double period = kTwoPi);
    static Domain open(int n);

    bool is_torus() const { return kind == Kind::Torus; }
};

/// Map a coordinate to [0, period).
double wrap_coord(double x, double period);

/// Minimal-image representative of a coordinate difference in
/// [-period/2, period/2). A difference of exactly +/- period/2
/// canonicalizes to -period/2 so the representative is single-valued.
double min_image_coord(double dx, double period);

/// Wrap a position into the fundamental domain; identity on open space.
Vec wrap_position(const Vec& x, const Domain& d);

/// Minimal-image representative of x - y (plain difference on open space).
/// Its norm is the geodesic distance.
Vec displacement(const Vec& x, const Vec& y, const Domain& d);

double distance(const Vec& x, const Vec& y, const Domain& d);

// Flat-array variants used by the pair loops; no allocation.
void displacement_into(const double* x, const double* y, int n, const Domain& d, double* out);
double distance2_flat(const double* x, const double* y, int n, const Domain& d);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm(std::span<const double> a);

} // namespace cslab
