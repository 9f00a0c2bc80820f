#pragma once
#include "cslab/dynamics.hpp"
#include "cslab/relations.hpp"

namespace cslab {

/// V2 = sum_{i,j} |v_i - v_j|^2 over all ordered pairs: the squared distance
/// of the velocity ensemble to the diagonal set { v_1 = ... = v_N }.
double quadratic_variation(const EnsembleState& s);

/// V1 = sum_{i,j} |v_i - v_j| over all ordered pairs.
double one_variation(const EnsembleState& s);

/// I1 = (1/N) sum_{i,j} phi_ij |v_i - v_j|.
double i1_functional(const EnsembleState& s, const SystemSpec& sys);

/// dV2/dt along the flow: -2 sum_{i,j} phi_ij |v_i - v_j|^2.
double dissipation_rate(const EnsembleState& s, const SystemSpec& sys);

double alignment_diameter(const EnsembleState& s);                    // max_ij |v_i - v_j|
double flock_diameter(const EnsembleState& s, const SystemSpec& sys); // max_ij dist(x_i, x_j)
double min_pair_distance(const EnsembleState& s, const SystemSpec& sys);

/// Kinetic, potential and total energy for the forced systems.
///   K = (1/2N) sum |v_i|^2
///   P = (1/N) sum U(x_i)                    (confinement)
///   P = (1/(2N^2)) sum_{i,j} U(x_i - x_j)   (pairwise interaction)
/// The pairwise normalization is the one under which dE/dt equals
/// -(1/(2N^2)) sum phi_ij |v_i - v_j|^2 exactly; outputs record both this and
/// the conventional constant so the factor-two gap stays visible.
/// Throws Unsupported for NoForce or torus systems.
struct EnergyBreakdown {
    double E = 0.0, K = 0.0, P = 0.0;
};
EnergyBreakdown total_energy(const EnsembleState& s, const SystemSpec& sys);

/// Two-agent Lyapunov functionals.
///   confinement: pair_energy = |v12|^2 + |x12|^2,   chi = phi12 (x12 . v12)
///   interaction: pair_energy = |v12|^2 + 2 U(x12),  chi = phi12 (grad U(x12) . v12)
/// modified_energy = pair_energy + eps * chi. N = 2 with a force, else Unsupported.
struct PairFunctionals {
    double chi = 0.0, modified_energy = 0.0, pair_energy = 0.0;
};
PairFunctionals pair_functionals(const EnsembleState& s, const SystemSpec& sys, double eps);

struct DiagnosticsSample {
    double t = 0.0;
    double V2 = 0.0, V1 = 0.0, I1 = 0.0, diss_rate = 0.0;
    double E = 0.0, K = 0.0, P = 0.0;
    double align_diam = 0.0, flock_diam = 0.0;
    bool has_energy = false;
    bool has_pair = false;
    double chi = 0.0, modified_energy = 0.0, pair_energy = 0.0;
};
DiagnosticsSample sample_diagnostics(const EnsembleState& s, const SystemSpec& sys,
                                     double pair_eps = 0.1);

struct RelationOptions {
    double tol = 1e-9;
    long long bound = 100;
};

/// Partition of the agents into velocity clusters (transitive closure of
/// |v_i - v_j| <= eps_v), with the spatial-separation check at the kernel
/// support radius and per-group-pair integer-relation certificates on the
/// velocity differences.
struct ClusterCensus {
    struct Certificate {
        int g1 = 0, g2 = 0;
        IntRow q;
        double residual = 0.0;
    };
    std::vector<std::vector<int>> groups; // sorted members, groups ordered by first member
    int K = 0;
    bool separation_ok = false;
    double eps_v = 0.0;
    std::vector<Certificate> certificates;
};
ClusterCensus cluster_census(const EnsembleState& s, const SystemSpec& sys, double eps_v,
                             const RelationOptions& opts = {});

} // namespace cslab
