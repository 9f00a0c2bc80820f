#include "cslab/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace cslab {
namespace {

double pair_speed2(const EnsembleState& s, int i, int j) {
    double d2 = 0.0;
    const double* vi = s.vel(i);
    const double* vj = s.vel(j);
    for (int k = 0; k < s.n; ++k) {
        double c = vi[k] - vj[k];
        d2 += c * c;
    }
    return d2;
}

double pair_phi(const EnsembleState& s, const SystemSpec& sys, int i, int j) {
    double r2 = distance2_flat(s.pos(i), s.pos(j), s.n, sys.domain);
    return kernel_eval(sys.kernel, std::sqrt(r2));
}

} // namespace

double quadratic_variation(const EnsembleState& s) {
    double sum = 0.0;
    for (int i = 0; i < s.N; ++i)
        for (int j = i + 1; j < s.N; ++j) sum += 2.0 * pair_speed2(s, i, j);
    return sum;
}

double one_variation(const EnsembleState& s) {
    double sum = 0.0;
    for (int i = 0; i < s.N; ++i)
        for (int j = i + 1; j < s.N; ++j) sum += 2.0 * std::sqrt(pair_speed2(s, i, j));
    return sum;
}

double i1_functional(const EnsembleState& s, const SystemSpec& sys) {
    sys.check_state(s);
    double sum = 0.0;
    for (int i = 0; i < s.N; ++i)
        for (int j = i + 1; j < s.N; ++j)
            sum += 2.0 * pair_phi(s, sys, i, j) * std::sqrt(pair_speed2(s, i, j));
    return sum / s.N;
}

double dissipation_rate(const EnsembleState& s, const SystemSpec& sys) {
    sys.check_state(s);
    double sum = 0.0;
    for (int i = 0; i < s.N; ++i)
        for (int j = i + 1; j < s.N; ++j)
            sum += 2.0 * pair_phi(s, sys, i, j) * pair_speed2(s, i, j);
    return -2.0 * sum;
}

double alignment_diameter(const EnsembleState& s) {
    double m = 0.0;
    for (int i = 0; i < s.N; ++i)
        for (int j = i + 1; j < s.N; ++j) m = std::max(m, pair_speed2(s, i, j));
    return std::sqrt(m);
}

double flock_diameter(const EnsembleState& s, const SystemSpec& sys) {
    double m = 0.0;
    for (int i = 0; i < s.N; ++i)
        for (int j = i + 1; j < s.N; ++j)
            m = std::max(m, distance2_flat(s.pos(i), s.pos(j), s.n, sys.domain));
    return std::sqrt(m);
}

double min_pair_distance(const EnsembleState& s, const SystemSpec& sys) {
    double m = std::numeric_limits<double>::infinity();
    for (int i = 0; i < s.N; ++i)
        for (int j = i + 1; j < s.N; ++j)
            m = std::min(m, distance2_flat(s.pos(i), s.pos(j), s.n, sys.domain));
    return std::sqrt(m);
}

EnergyBreakdown total_energy(const EnsembleState& s, const SystemSpec& sys) {
    sys.check_state(s);
    if (sys.force == ForceMode::NoForce || sys.domain.is_torus())
        throw Unsupported("total_energy: defined for forced systems on open space");

    EnergyBreakdown e;
    double k = 0.0;
    for (size_t idx = 0; idx < s.v.size(); ++idx) k += s.v[idx] * s.v[idx];
    e.K = k / (2.0 * s.N);

    double p = 0.0;
    if (sys.force == ForceMode::Confinement) {
        for (int i = 0; i < s.N; ++i) {
            double r = std::sqrt(norm2(std::span(s.pos(i), static_cast<size_t>(s.n))));
            p += potential_eval(sys.potential, r);
        }
        e.P = p / s.N;
    } else {
        for (int i = 0; i < s.N; ++i)
            for (int j = i + 1; j < s.N; ++j) {
                double r = std::sqrt(distance2_flat(s.pos(i), s.pos(j), s.n, sys.domain));
                p += potential_eval(sys.potential, r);
            }
        e.P = p / (static_cast<double>(s.N) * s.N); // (1/(2N^2)) over ordered pairs
    }
    e.E = e.K + e.P;
    return e;
}

PairFunctionals pair_functionals(const EnsembleState& s, const SystemSpec& sys, double eps) {
    sys.check_state(s);
    if (s.N != 2) throw Unsupported("pair_functionals: requires N = 2");
    if (sys.force == ForceMode::NoForce)
        throw Unsupported("pair_functionals: requires a potential force");

    const int n = s.n;
    double x12[64], v12[64];
    for (int k = 0; k < n; ++k) {
        x12[k] = s.pos(0)[k] - s.pos(1)[k];
        v12[k] = s.vel(0)[k] - s.vel(1)[k];
    }
    double r2 = 0.0, vv = 0.0, xv = 0.0;
    for (int k = 0; k < n; ++k) {
        r2 += x12[k] * x12[k];
        vv += v12[k] * v12[k];
        xv += x12[k] * v12[k];
    }
    double r = std::sqrt(r2);
    double phi = kernel_eval(sys.kernel, r);

    PairFunctionals f;
    if (sys.force == ForceMode::Confinement) {
        f.pair_energy = vv + r2;
        f.chi = phi * xv;
    } else {
        f.pair_energy = vv + 2.0 * potential_eval(sys.potential, r);
        double grad[64];
        potential_grad_into(sys.potential, x12, n, grad);
        double gv = 0.0;
        for (int k = 0; k < n; ++k) gv += grad[k] * v12[k];
        f.chi = phi * gv;
    }
    f.modified_energy = f.pair_energy + eps * f.chi;
    return f;
}

DiagnosticsSample sample_diagnostics(const EnsembleState& s, const SystemSpec& sys,
                                     double pair_eps) {
    DiagnosticsSample d;
    d.t = s.t;
    d.V2 = quadratic_variation(s);
    d.V1 = one_variation(s);
    d.I1 = i1_functional(s, sys);
    d.diss_rate = dissipation_rate(s, sys);
    d.align_diam = alignment_diameter(s);
    d.flock_diam = flock_diameter(s, sys);
    d.has_energy = sys.force != ForceMode::NoForce && !sys.domain.is_torus();
    if (d.has_energy) {
        EnergyBreakdown e = total_energy(s, sys);
        d.E = e.E;
        d.K = e.K;
        d.P = e.P;
    } else {
        d.E = d.K = d.P = std::numeric_limits<double>::quiet_NaN();
    }
    d.has_pair = s.N == 2 && sys.force != ForceMode::NoForce;
    if (d.has_pair) {
        PairFunctionals f = pair_functionals(s, sys, pair_eps);
        d.chi = f.chi;
        d.modified_energy = f.modified_energy;
        d.pair_energy = f.pair_energy;
    }
    return d;
}

ClusterCensus cluster_census(const EnsembleState& s, const SystemSpec& sys, double eps_v,
                             const RelationOptions& opts) {
    sys.check_state(s);
    const int N = s.N, n = s.n;

    // union-find over |v_i - v_j| <= eps_v
    std::vector<int> parent(static_cast<size_t>(N));
    std::iota(parent.begin(), parent.end(), 0);
    std::function<int(int)> find = [&](int a) {
        while (parent[static_cast<size_t>(a)] != a) {
            parent[static_cast<size_t>(a)] = parent[static_cast<size_t>(parent[static_cast<size_t>(a)])];
            a = parent[static_cast<size_t>(a)];
        }
        return a;
    };
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            if (std::sqrt(pair_speed2(s, i, j)) <= eps_v) {
                int ra = find(i), rb = find(j);
                if (ra != rb) parent[static_cast<size_t>(std::max(ra, rb))] = std::min(ra, rb);
            }

    ClusterCensus c;
    c.eps_v = eps_v;
    std::vector<int> root_to_group(static_cast<size_t>(N), -1);
    for (int i = 0; i < N; ++i) {
        int r = find(i);
        if (root_to_group[static_cast<size_t>(r)] < 0) {
            root_to_group[static_cast<size_t>(r)] = static_cast<int>(c.groups.size());
            c.groups.emplace_back();
        }
        c.groups[static_cast<size_t>(root_to_group[static_cast<size_t>(r)])].push_back(i);
    }
    c.K = static_cast<int>(c.groups.size());

    double sep = sys.kernel.support_radius();
    c.separation_ok = true;
    if (c.K > 1) {
        if (std::isinf(sep)) {
            c.separation_ok = false;
        } else if (sep > 0.0) {
            for (size_t g = 0; g < c.groups.size() && c.separation_ok; ++g)
                for (size_t h = g + 1; h < c.groups.size() && c.separation_ok; ++h)
                    for (int a : c.groups[g]) {
                        for (int b : c.groups[h])
                            if (std::sqrt(distance2_flat(s.pos(a), s.pos(b), n, sys.domain)) <
                                sep) {
                                c.separation_ok = false;
                                break;
                            }
                        if (!c.separation_ok) break;
                    }
        }
    }

    // group mean velocities, then a Kronecker certificate per group pair
    std::vector<Vec> gv(c.groups.size(), Vec(static_cast<size_t>(n), 0.0));
    for (size_t g = 0; g < c.groups.size(); ++g) {
        for (int a : c.groups[g])
            for (int k = 0; k < n; ++k) gv[g][static_cast<size_t>(k)] += s.vel(a)[k];
        for (int k = 0; k < n; ++k) gv[g][static_cast<size_t>(k)] /= static_cast<double>(c.groups[g].size());
    }
    for (size_t g = 0; g < c.groups.size(); ++g)
        for (size_t h = g + 1; h < c.groups.size(); ++h) {
            std::vector<double> dv(static_cast<size_t>(n));
            for (int k = 0; k < n; ++k)
                dv[static_cast<size_t>(k)] = gv[g][static_cast<size_t>(k)] - gv[h][static_cast<size_t>(k)];
            RelationResult r = integer_relation({dv, opts.tol, opts.bound, 0.0});
            if (r.found)
                c.certificates.push_back({static_cast<int>(g), static_cast<int>(h), r.q, r.residual});
        }
    return c;
}

} // namespace cslab
