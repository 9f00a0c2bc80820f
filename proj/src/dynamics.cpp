#include "cslab/dynamics.hpp"

#include <cmath>

namespace cslab {

EnsembleState EnsembleState::zeros(int N, int n) {
    EnsembleState s;
    s.N = N;
    s.n = n;
    s.x.assign(static_cast<size_t>(N) * n, 0.0);
    s.v.assign(static_cast<size_t>(N) * n, 0.0);
    return s;
}

bool EnsembleState::finite() const {
    for (double c : x)
        if (!std::isfinite(c)) return false;
    for (double c : v)
        if (!std::isfinite(c)) return false;
    return std::isfinite(acc_phi) && std::isfinite(acc_diss) && std::isfinite(acc_i1);
}

void SystemSpec::validate() const {
    if (N < 2) throw InvalidState("SystemSpec: N must be >= 2");
    if (n < 1 || n > 64) throw InvalidState("SystemSpec: n must be in [1, 64]");
    if (domain.dim != n) throw InvalidState("SystemSpec: domain dimension != n");
    kernel.validate();
    potential.validate();
    if (force != ForceMode::NoForce && domain.is_torus())
        throw InvalidState("SystemSpec: potential forces require the open domain");
    if (force != ForceMode::NoForce && potential.kind == PotentialSpec::Kind::None)
        throw InvalidState("SystemSpec: force mode set but potential is None");
    if (!masses.empty()) {
        if (static_cast<int>(masses.size()) != N)
            throw InvalidState("SystemSpec: masses size != N");
        for (double m : masses)
            if (!(m > 0.0)) throw InvalidState("SystemSpec: masses must be positive");
    }
}

void SystemSpec::check_state(const EnsembleState& s) const {
    if (s.N != N || s.n != n) throw InvalidState("state does not match system (N, n)");
    if (s.x.size() != static_cast<size_t>(N) * n || s.v.size() != static_cast<size_t>(N) * n)
        throw InvalidState("state arrays have wrong length");
}

void Deriv::resize(int N, int n) {
    dx.assign(static_cast<size_t>(N) * n, 0.0);
    dv.assign(static_cast<size_t>(N) * n, 0.0);
    dphi = ddiss = di1 = 0.0;
}

void eval_rhs(const EnsembleState& s, const SystemSpec& sys, Deriv& out) {
    sys.check_state(s);
    const int N = s.N, n = s.n;
    out.resize(N, n);

    for (size_t idx = 0; idx < s.v.size(); ++idx) out.dx[idx] = s.v[idx];

    const double invN = 1.0 / N;
    const bool torus = sys.domain.is_torus();
    const double period = sys.domain.period;
    const bool zero_kernel = sys.kernel.kind == KernelSpec::Kind::Zero;

    double sum_phi = 0.0;  // over ordered pairs i != j
    double sum_diss = 0.0; // phi_ij |v_i - v_j|^2 over ordered pairs
    double sum_absv = 0.0; // phi_ij |v_i - v_j|  over ordered pairs

    if (!zero_kernel) {
        for (int i = 0; i < N; ++i) {
            const double* xi = s.pos(i);
            const double* vi = s.vel(i);
            for (int j = i + 1; j < N; ++j) {
                const double* xj = s.pos(j);
                const double* vj = s.vel(j);
                double r2 = 0.0;
                if (torus) {
                    for (int k = 0; k < n; ++k) {
                        double c = min_image_coord(xi[k] - xj[k], period);
                        r2 += c * c;
                    }
                } else {
                    for (int k = 0; k < n; ++k) {
                        double c = xi[k] - xj[k];
                        r2 += c * c;
                    }
                }
                double phi = kernel_eval(sys.kernel, std::sqrt(r2));
                if (phi == 0.0) continue;

                double dv2 = 0.0;
                for (int k = 0; k < n; ++k) {
                    double c = vi[k] - vj[k];
                    dv2 += c * c;
                }
                sum_phi += 2.0 * phi;
                sum_diss += 2.0 * phi * dv2;
                sum_absv += 2.0 * phi * std::sqrt(dv2);

                double w = phi * invN;
                double* dvi = out.dv.data() + static_cast<size_t>(i) * n;
                double* dvj = out.dv.data() + static_cast<size_t>(j) * n;
                for (int k = 0; k < n; ++k) {
                    double a = w * (vj[k] - vi[k]);
                    dvi[k] += a;
                    dvj[k] -= a;
                }
            }
        }
    }

    if (sys.force == ForceMode::Confinement) {
        double grad[64];
        for (int i = 0; i < N; ++i) {
            potential_grad_into(sys.potential, s.pos(i), n, grad);
            double* dvi = out.dv.data() + static_cast<size_t>(i) * n;
            for (int k = 0; k < n; ++k) dvi[k] -= grad[k];
        }
    } else if (sys.force == ForceMode::Pairwise) {
        double diff[64], grad[64];
        for (int i = 0; i < N; ++i) {
            const double* xi = s.pos(i);
            for (int j = i + 1; j < N; ++j) {
                const double* xj = s.pos(j);
                for (int k = 0; k < n; ++k) diff[k] = xi[k] - xj[k];
                potential_grad_into(sys.potential, diff, n, grad);
                double* dvi = out.dv.data() + static_cast<size_t>(i) * n;
                double* dvj = out.dv.data() + static_cast<size_t>(j) * n;
                for (int k = 0; k < n; ++k) {
                    double g = invN * grad[k];
                    dvi[k] -= g; // grad U is odd, so the j term is the exact negation
                    dvj[k] += g;
                }
            }
        }
    }

    out.dphi = sum_phi;
    out.ddiss = sum_diss;
    out.di1 = sum_absv * invN;
}

Deriv eval_rhs(const EnsembleState& s, const SystemSpec& sys) {
    Deriv d;
    eval_rhs(s, sys, d);
    return d;
}

double divergence(const EnsembleState& s, const SystemSpec& sys) {
    sys.check_state(s);
    const int N = s.N, n = s.n;
    double sum_phi = 0.0;
    for (int i = 0; i < N; ++i) {
        for (int j = i + 1; j < N; ++j) {
            double r2 = distance2_flat(s.pos(i), s.pos(j), n, sys.domain);
            sum_phi += 2.0 * kernel_eval(sys.kernel, std::sqrt(r2));
        }
    }
    return -(static_cast<double>(n) / N) * sum_phi;
}

EnsembleState galilean_project(const EnsembleState& s, const SystemSpec& sys) {
    sys.check_state(s);
    if (sys.domain.is_torus())
        throw Unsupported("galilean_project: position means are ill-defined mod the period");
    EnsembleState out = s;
    const int N = s.N, n = s.n;
    for (int k = 0; k < n; ++k) {
        double xm = 0.0, vm = 0.0;
        for (int i = 0; i < N; ++i) {
            xm += s.pos(i)[k];
            vm += s.vel(i)[k];
        }
        xm /= N;
        vm /= N;
        for (int i = 0; i < N; ++i) {
            out.pos(i)[k] -= xm;
            out.vel(i)[k] -= vm;
        }
    }
    return out;
}

Means conserved_means(const EnsembleState& s, const SystemSpec& sys) {
    sys.check_state(s);
    const int N = s.N, n = s.n;
    Means m;
    m.v_mean.assign(n, 0.0);
    for (int i = 0; i < N; ++i)
        for (int k = 0; k < n; ++k) m.v_mean[k] += s.vel(i)[k];
    for (int k = 0; k < n; ++k) m.v_mean[k] /= N;

    if (!sys.domain.is_torus()) {
        Vec xm(n, 0.0);
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < n; ++k) xm[k] += s.pos(i)[k];
        for (int k = 0; k < n; ++k) xm[k] /= N;
        m.x_mean = std::move(xm);
    }
    return m;
}

} // namespace cslab
