#include "cslab/model.hpp"

#include <cmath>

namespace cslab {

KernelSpec KernelSpec::smooth_bump(double r0, double amp) {
    KernelSpec k;
    k.kind = Kind::SmoothBump;
    k.r0 = r0;
    k.amp = amp;
    k.validate();
    return k;
}

KernelSpec KernelSpec::plateau(double amp, double r_flat, double r0) {
    KernelSpec k;
    k.kind = Kind::Plateau;
    k.amp = amp;
    k.r_flat = r_flat;
    k.r0 = r0;
    k.validate();
    return k;
}

KernelSpec KernelSpec::constant(double amp) {
    KernelSpec k;
    k.kind = Kind::Constant;
    k.amp = amp;
    k.validate();
    return k;
}

KernelSpec KernelSpec::power_tail(double amp, double beta) {
    KernelSpec k;
    k.kind = Kind::PowerTail;
    k.amp = amp;
    k.beta = beta;
    k.validate();
    return k;
}

KernelSpec KernelSpec::zero() {
    KernelSpec k;
    k.kind = Kind::Zero;
    k.amp = 0.0;
    return k;
}

double KernelSpec::support_radius() const {
    switch (kind) {
        case Kind::SmoothBump:
        case Kind::Plateau: return r0;
        case Kind::Constant:
        case Kind::PowerTail: return std::numeric_limits<double>::infinity();
        case Kind::Zero: return 0.0;
    }
    return 0.0;
}

void KernelSpec::validate() const {
    if (!(amp >= 0.0)) throw InvalidState("KernelSpec: amp must be >= 0");
    switch (kind) {
        case Kind::SmoothBump:
            if (!(r0 > 0.0)) throw InvalidState("KernelSpec: r0 must be > 0");
            break;
        case Kind::Plateau:
            if (!(r_flat > 0.0 && r_flat < r0))
                throw InvalidState("KernelSpec: requires 0 < r_flat < r0");
            break;
        case Kind::PowerTail:
            if (!(beta >= 0.0)) throw InvalidState("KernelSpec: beta must be >= 0");
            break;
        default: break;
    }
}

double kernel_eval(const KernelSpec& k, double r) {
    if (!(r >= 0.0)) throw InvalidState("kernel_eval: r must be >= 0");
    switch (k.kind) {
        case KernelSpec::Kind::SmoothBump: {
            if (r >= k.r0) return 0.0;
            double s = r / k.r0;
            double g = 1.0 - s * s;
            return k.amp * std::exp(1.0 - 1.0 / g);
        }
        case KernelSpec::Kind::Plateau: {
            if (r >= k.r0) return 0.0;
            if (r <= k.r_flat) return k.amp;
            double s = (r - k.r_flat) / (k.r0 - k.r_flat);
            // cubic Hermite ramp: value amp->0, zero slope at both ends
            return k.amp * (1.0 + s * s * (2.0 * s - 3.0));
        }
        case KernelSpec::Kind::Constant: return k.amp;
        case KernelSpec::Kind::PowerTail:
            return k.amp * std::pow(1.0 + r * r, -0.5 * k.beta);
        case KernelSpec::Kind::Zero: return 0.0;
    }
    return 0.0;
}

double kernel_deriv(const KernelSpec& k, double r) {
    if (!(r >= 0.0)) throw InvalidState("kernel_deriv: r must be >= 0");
    switch (k.kind) {
        case KernelSpec::Kind::SmoothBump: {
            if (r >= k.r0) return 0.0;
            double s = r / k.r0;
            double g = 1.0 - s * s;
            return -2.0 * k.amp * s * std::exp(1.0 - 1.0 / g) / (k.r0 * g * g);
        }
        case KernelSpec::Kind::Plateau: {
            if (r >= k.r0 || r <= k.r_flat) return 0.0;
            double w = k.r0 - k.r_flat;
            double s = (r - k.r_flat) / w;
            return k.amp * 6.0 * s * (s - 1.0) / w;
        }
        case KernelSpec::Kind::Constant: return 0.0;
        case KernelSpec::Kind::PowerTail:
            return -k.amp * k.beta * r * std::pow(1.0 + r * r, -0.5 * k.beta - 1.0);
        case KernelSpec::Kind::Zero: return 0.0;
    }
    return 0.0;
}

PotentialSpec PotentialSpec::none() { return {}; }

PotentialSpec PotentialSpec::quadratic_confinement() {
    PotentialSpec p;
    p.kind = Kind::QuadraticConfinement;
    return p;
}

PotentialSpec PotentialSpec::quadratic_well(double l0) {
    PotentialSpec p;
    p.kind = Kind::QuadraticWell;
    p.l0 = l0;
    p.validate();
    return p;
}

PotentialSpec PotentialSpec::interval_well(double l0, double l1) {
    PotentialSpec p;
    p.kind = Kind::IntervalWell;
    p.l0 = l0;
    p.l1 = l1;
    p.validate();
    return p;
}

void PotentialSpec::validate() const {
    switch (kind) {
        case Kind::QuadraticWell:
            if (!(l0 >= 0.0)) throw InvalidState("PotentialSpec: l0 must be >= 0");
            break;
        case Kind::IntervalWell:
            if (!(l0 >= 0.0 && l1 >= l0))
                throw InvalidState("PotentialSpec: requires 0 <= l0 <= l1");
            break;
        default: break;
    }
}

double potential_eval(const PotentialSpec& p, double r) {
    switch (p.kind) {
        case PotentialSpec::Kind::None: return 0.0;
        case PotentialSpec::Kind::QuadraticConfinement: return 0.5 * r * r;
        case PotentialSpec::Kind::QuadraticWell: {
            double s = r - p.l0;
            return s > 0.0 ? s * s : 0.0;
        }
        case PotentialSpec::Kind::IntervalWell: {
            if (r < p.l0) { double s = r - p.l0; return s * s; }
            if (r > p.l1) { double s = r - p.l1; return s * s; }
            return 0.0;
        }
    }
    return 0.0;
}

double potential_deriv(const PotentialSpec& p, double r) {
    switch (p.kind) {
        case PotentialSpec::Kind::None: return 0.0;
        case PotentialSpec::Kind::QuadraticConfinement: return r;
        case PotentialSpec::Kind::QuadraticWell: {
            double s = r - p.l0;
            return s > 0.0 ? 2.0 * s : 0.0;
        }
        case PotentialSpec::Kind::IntervalWell: {
            if (r < p.l0) return 2.0 * (r - p.l0);
            if (r > p.l1) return 2.0 * (r - p.l1);
            return 0.0;
        }
    }
    return 0.0;
}

Vec potential_grad(const PotentialSpec& p, const Vec& x) {
    Vec out(x.size(), 0.0);
    potential_grad_into(p, x.data(), static_cast<int>(x.size()), out.data());
    return out;
}

void potential_grad_into(const PotentialSpec& p, const double* x, int n, double* out) {
    double r2 = 0.0;
    for (int k = 0; k < n; ++k) r2 += x[k] * x[k];
    if (p.kind == PotentialSpec::Kind::None || r2 == 0.0) {
        for (int k = 0; k < n; ++k) out[k] = 0.0;
        return;
    }
    double r = std::sqrt(r2);
    double scale = potential_deriv(p, r) / r;
    for (int k = 0; k < n; ++k) out[k] = scale * x[k];
}

ValidationReport validate_pair(const KernelSpec& k, const PotentialSpec& p, double R, int grid) {
    return validate_pair_sampled([&k](double r) { return kernel_deriv(k, r); },
                                 [&p](double r) { return potential_eval(p, r); },
                                 [&p](double r) { return potential_deriv(p, r); }, R, grid);
}

ValidationReport validate_pair_sampled(const std::function<double(double)>& phi_deriv,
                                       const std::function<double(double)>& u,
                                       const std::function<double(double)>& u_deriv,
                                       double R, int grid) {
    if (!(R > 0.0)) throw InvalidState("validate_pair: R must be > 0");
    if (grid < 100) throw InvalidState("validate_pair: grid must be >= 100");

    ValidationReport rep;
    rep.R = R;
    rep.grid = grid;
    double dr = R / (grid - 1);
    for (int i = 0; i < grid; ++i) {
        double r = i * dr;
        double up = u_deriv(r);
        double prod = up * phi_deriv(r);
        if (prod > rep.worst_sign_product || i == 0) {
            rep.worst_sign_product = prod;
            rep.worst_sign_r = r;
        }
        double uv = u(r);
        if (uv > 0.0) {
            double ratio = up * up / uv;
            if (ratio < rep.c_R) {
                rep.c_R = ratio;
                rep.c_R_r = r;
            }
        }
    }
    rep.sign_ok = rep.worst_sign_product <= 0.0;
    rep.c_R_ok = rep.c_R >= rep.tolerance; // vacuous (c_R = inf) when U == 0 on the grid
    return rep;
}

} // namespace cslab
