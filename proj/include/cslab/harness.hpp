#pragma once
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cslab/diagnostics.hpp"
#include "cslab/integrator.hpp"

namespace cslab {

enum class PositionLaw { UniformTorus, UniformBox };
enum class VelocityLaw { UniformBall, Gaussian };

/// Seeded initial-data law. The draw order is fixed (positions agent-major,
/// then velocities agent-major), so a seed pins the sample bit-exactly.
struct SampleSpec {
    PositionLaw position = PositionLaw::UniformTorus;
    double box_half_width = 1.0; // UniformBox: [-L, L]^n
    VelocityLaw velocity = VelocityLaw::UniformBall;
    double v_max = 1.0; // UniformBall radius
    double sigma = 1.0; // Gaussian per-coordinate deviation
    bool galilean_center = false;
    uint64_t seed = 0;
    /// If positive, positions are redrawn until all pairs are at least this
    /// far apart (minimal image); used to start sticky runs outside r0.
    double min_pair_separation = 0.0;
};

EnsembleState sample_initial(const SampleSpec& spec, const SystemSpec& sys);

struct RateFit {
    double exp_rate = 0.0;     // slope of log y over t
    double power_slope = 0.0;  // slope of log y over log(1 + t)
    double exp_residual = 0.0; // rms residuals of the two fits
    double power_residual = 0.0;
    bool clipped = false; // some y <= 0 were clipped at 1e-30
    int samples = 0;
};

/// Least-squares decay fits over the samples with t in [w0, w1].
/// Throws InvalidConfig with fewer than 4 usable samples.
RateFit fit_decay_rate(std::span<const double> times, std::span<const double> ys, double w0,
                       double w1);

struct TrialThresholds {
    double eps_align = 1e-3;       // relative alignment threshold
    double eps_cluster_rel = 1e-3; // census velocity tolerance, relative to initial spread
    double eps_cluster_floor = 1e-8;
    double relation_tol = 1e-9;
    long long relation_bound = 100;
    double pair_eps = 0.1;
};

struct TrialSummary {
    int trial_index = 0;
    uint64_t seed = 0;
    bool blew_up = false;
    double blowup_time = 0.0;
    double T = 0.0;
    double V2_initial = 0.0;
    double V2_final = 0.0;
    double V1_final = 0.0;
    double align_diam_final = 0.0;
    bool aligned = false;      // V2(T) <= eps_align * max(V2(0), 1)
    bool pair_aligned = false; // min_ij |v_i - v_j|(T) <= eps_align
    double acc_phi = 0.0;
    double acc_diss = 0.0;
    double acc_i1 = 0.0;
    double min_pair_dist = 0.0;
    bool H_flag = false; // min distance >= kernel support radius throughout
    /// acc_phi needed for the alignment threshold under the exact two-agent
    /// decay law; recorded so non-aligned outcomes are auditable.
    double interaction_threshold = 0.0;
    int cluster_count = 0;
    bool separation_ok = false;
    int relation_certificates = 0;
    double census_eps_v = 0.0;
    bool fit_valid = false;
    RateFit align_fit;
};

TrialSummary run_trial(const SystemSpec& sys, const SampleSpec& spec,
                       const IntegrationParams& params, const TrialThresholds& thresholds = {});

/// Classification of an already-integrated trajectory; run_trial is
/// sample_initial + integrate + this fold.
TrialSummary summarize_trial(const EnsembleState& s0, const TrajectoryRecord& rec,
                             const SystemSpec& sys, const TrialThresholds& thresholds = {});

struct WilsonInterval {
    double lo = 0.0, hi = 0.0;
};
/// 95% Wilson score interval for a binomial fraction.
WilsonInterval wilson95(int successes, int trials);

struct SweepReport {
    int trials = 0;
    uint64_t master_seed = 0;
    int blowups = 0;
    double aligned_fraction = 0.0;
    WilsonInterval aligned_ci;
    double pair_aligned_fraction = 0.0;
    WilsonInterval pair_aligned_ci;
    double h_flag_fraction = 0.0;
    std::vector<std::pair<int, int>> cluster_histogram; // (K, count), ascending K
    double frac_clusters_le_2n = 0.0;
    std::vector<TrialSummary> summaries; // by trial index
};

/// Deterministic aggregate fold over the summaries (trial-index order).
SweepReport aggregate_summaries(std::vector<TrialSummary> summaries, uint64_t master_seed, int n);

/// Runs `trials` seeded trials (seed_i = mix64(master_seed XOR i)) on a worker
/// pool and folds the summaries. Serial and parallel execution produce
/// identical reports.
SweepReport run_sweep(const SystemSpec& sys, const SampleSpec& sample_template,
                      const IntegrationParams& params, const TrialThresholds& thresholds,
                      int trials, uint64_t master_seed, int parallelism = 0);

} // namespace cslab
