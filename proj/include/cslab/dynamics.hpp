#pragma once
#include <optional>
#include <vector>

#include "cslab/geometry.hpp"
#include "cslab/model.hpp"

namespace cslab {

/// Phase point of the whole ensemble plus running quadratures.
/// Flat layout: coordinate k of agent i lives at index i*n + k.
///
/// acc_phi  accumulates  integral of sum_{i != j} phi_ij          (flow-Jacobian exponent)
/// acc_diss accumulates  integral of sum_{i,j} phi_ij |v_i-v_j|^2 (V2 dissipation, without the -2)
/// acc_i1   accumulates  integral of (1/N) sum_{i,j} phi_ij |v_i-v_j|
struct EnsembleState {
    double t = 0.0;
    int N = 0;
    int n = 0;
    std::vector<double> x;
    std::vector<double> v;
    double acc_phi = 0.0;
    double acc_diss = 0.0;
    double acc_i1 = 0.0;

    static EnsembleState zeros(int N, int n);

    double* pos(int i) { return x.data() + static_cast<size_t>(i) * n; }
    const double* pos(int i) const { return x.data() + static_cast<size_t>(i) * n; }
    double* vel(int i) { return v.data() + static_cast<size_t>(i) * n; }
    const double* vel(int i) const { return v.data() + static_cast<size_t>(i) * n; }

    bool finite() const;
};

enum class ForceMode { NoForce, Confinement, Pairwise };

struct SystemSpec {
    Domain domain = Domain::open(1);
    KernelSpec kernel = KernelSpec::zero();
    ForceMode force = ForceMode::NoForce;
    PotentialSpec potential{};
    int N = 2;
    int n = 1;
    std::vector<double> masses; // sticky model only; empty means unit masses

    double mass(int i) const { return masses.empty() ? 1.0 : masses[static_cast<size_t>(i)]; }

    /// Throws InvalidState on violated invariants (N >= 2, domain/force
    /// compatibility, mass count).
    void validate() const;
    void check_state(const EnsembleState& s) const;
};

/// Time derivative of the augmented state.
struct Deriv {
    std::vector<double> dx, dv;
    double dphi = 0.0, ddiss = 0.0, di1 = 0.0;
    void resize(int N, int n);
};

/// Right-hand side of the selected system. All pairwise kernel distances use
/// the minimal image on the torus; self-terms vanish identically.
void eval_rhs(const EnsembleState& s, const SystemSpec& sys, Deriv& out);
Deriv eval_rhs(const EnsembleState& s, const SystemSpec& sys);

/// Divergence of the ensemble field: -(n/N) sum_{i != j} phi_ij.
/// Potential forces contribute nothing (they do not depend on v).
double divergence(const EnsembleState& s, const SystemSpec& sys);

/// Subtract position and velocity means (the Galilean null space
/// x_mean = v_mean = 0). Accumulators and time are preserved.
/// Open domain only.
EnsembleState galilean_project(const EnsembleState& s, const SystemSpec& sys);

struct Means {
    std::optional<Vec> x_mean; // absent on the torus, where it is ill-defined
    Vec v_mean;
};
Means conserved_means(const EnsembleState& s, const SystemSpec& sys);

} // namespace cslab
