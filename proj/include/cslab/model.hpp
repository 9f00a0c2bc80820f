#pragma once
#include <functional>
#include <limits>

#include "cslab/geometry.hpp"

namespace cslab {

/// Radial communication kernel. Every variant is C^1, nonnegative and
/// non-increasing in r. SmoothBump and Plateau are compactly supported:
/// phi vanishes identically for r >= r0.
struct KernelSpec {
    enum class Kind { SmoothBump, Plateau, Constant, PowerTail, Zero };

    Kind kind = Kind::Zero;
    double amp = 1.0;     // peak value
    double r0 = 1.0;      // support radius (SmoothBump, Plateau)
    double r_flat = 0.25; // flat-top radius (Plateau), 0 < r_flat < r0
    double beta = 0.0;    // tail exponent (PowerTail), >= 0

    static KernelSpec smooth_bump(double r0, double amp = 1.0);
    static KernelSpec plateau(double amp, double r_flat, double r0);
    static KernelSpec constant(double amp);
    static KernelSpec power_tail(double amp, double beta);
    static KernelSpec zero();

    /// Radius beyond which phi vanishes: r0 for the compact variants,
    /// +inf for Constant/PowerTail, 0 for Zero.
    double support_radius() const;

    void validate() const;
};

double kernel_eval(const KernelSpec& k, double r);
double kernel_deriv(const KernelSpec& k, double r);

/// Radial potential U(r) >= 0, confining (U -> inf) for every variant
/// except None.
///   QuadraticConfinement: U(r) = r^2 / 2
///   QuadraticWell{l0}:    U(r) = ((r - l0)_+)^2
///   IntervalWell{l0,l1}:  U(r) = (r-l0)^2 for r < l0, 0 on [l0, l1],
///                         (r-l1)^2 for r > l1   (3-zone shape)
struct PotentialSpec {
    enum class Kind { None, QuadraticConfinement, QuadraticWell, IntervalWell };

    Kind kind = Kind::None;
    double l0 = 0.0;
    double l1 = 0.0;

    static PotentialSpec none();
    static PotentialSpec quadratic_confinement();
    static PotentialSpec quadratic_well(double l0);
    static PotentialSpec interval_well(double l0, double l1);

    void validate() const;
};

double potential_eval(const PotentialSpec& p, double r);
double potential_deriv(const PotentialSpec& p, double r); // dU/dr

/// grad U(x) = U'(|x|) x/|x|; returns the zero vector at x = 0 and for None.
Vec potential_grad(const PotentialSpec& p, const Vec& x);
void potential_grad_into(const PotentialSpec& p, const double* x, int n, double* out);

/// Grid audit of the pair-admissibility hypotheses on [0, R]:
///   (a) U'(r) phi'(r) <= 0 everywhere,
///   (b) c_R = min |U'|^2 / U over grid points with U > 0 stays above tolerance
///       (quadratic order of contact at the zero set of U).
struct ValidationReport {
    bool sign_ok = true;
    double worst_sign_product = 0.0; // max of U' phi' over the grid
    double worst_sign_r = 0.0;
    double c_R = std::numeric_limits<double>::infinity();
    double c_R_r = 0.0;
    bool c_R_ok = true;
    double tolerance = 1e-12;
    double R = 0.0;
    int grid = 0;

    bool pass() const { return sign_ok && c_R_ok; }
};

ValidationReport validate_pair(const KernelSpec& k, const PotentialSpec& p, double R,
                               int grid = 10000);

/// Same audit against caller-supplied radial profiles; used for shapes the
/// enum variants cannot express.
ValidationReport validate_pair_sampled(const std::function<double(double)>& phi_deriv,
                                       const std::function<double(double)>& u,
                                       const std::function<double(double)>& u_deriv,
                                       double R, int grid = 10000);

} // namespace cslab
