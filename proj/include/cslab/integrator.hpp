#pragma once
#include <limits>
#include <memory>
#include <vector>

#include "cslab/diagnostics.hpp"
#include "cslab/dynamics.hpp"

namespace cslab {

struct IntegrationParams {
    double h = 1e-3;
    double T = 10.0;
    int sample_every = 100; // steps between recorded samples
    bool wrap = true;       // re-wrap torus coordinates after each step
    double pair_eps = 0.1;  // epsilon for the recorded modified-energy column
};

struct TrajectoryRecord {
    std::vector<double> times;
    std::vector<EnsembleState> states;
    std::vector<DiagnosticsSample> samples;
    // tracked at every step, not only at sample times
    double min_pair_dist = std::numeric_limits<double>::infinity();
    bool blew_up = false;
    double blowup_time = 0.0;

    const EnsembleState& final_state() const { return states.back(); }
};

/// One classical RK4 step of the augmented system (positions, velocities and
/// the three quadrature accumulators share the tableau, so the accumulated
/// integrals carry the integrator's order). Wraps torus coordinates after the
/// step. Throws NumericalBlowup if the result is not finite.
EnsembleState step_rk4(const EnsembleState& s, const SystemSpec& sys, double h);

/// Reusable stepping context for callers that drive the loop themselves
/// (per-step observers, long runs). Semantics identical to step_rk4.
class Rk4Stepper {
  public:
    explicit Rk4Stepper(const SystemSpec& sys);
    void step(EnsembleState& s, double h, bool wrap = true);

  private:
    const SystemSpec& sys_;
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

/// Fixed-step RK4 over [t0, t0 + T], recording every sample_every-th step and
/// always the endpoint. Bit-deterministic for identical inputs. A blowup is
/// returned as a flagged partial record rather than thrown.
TrajectoryRecord integrate(const EnsembleState& s0, const SystemSpec& sys,
                           const IntegrationParams& params);

/// Central finite-difference determinant of the flow map S_t over all 2nN
/// phase coordinates (small ensembles only, 2nN <= 16). The internal
/// integrations leave torus coordinates unwrapped so the differences are
/// smooth across the periodic seam. delta in [1e-7, 1e-4].
double flow_jacobian_fd(const EnsembleState& s0, const SystemSpec& sys, double t, double delta,
                        double h = 1e-3);

} // namespace cslab
