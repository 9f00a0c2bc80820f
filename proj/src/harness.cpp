#include "cslab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <thread>

#include "cslab/rng.hpp"

namespace cslab {

EnsembleState sample_initial(const SampleSpec& spec, const SystemSpec& sys) {
    sys.validate();
    if (spec.galilean_center && sys.domain.is_torus())
        throw Unsupported("sample_initial: galilean centering is ill-defined on the torus");
    if (spec.position == PositionLaw::UniformTorus && !sys.domain.is_torus())
        throw InvalidConfig("sample_initial: uniform-torus position law needs a torus domain");
    if (spec.velocity == VelocityLaw::UniformBall && !(spec.v_max > 0.0))
        throw InvalidConfig("sample_initial: v_max must be > 0");
    if (spec.velocity == VelocityLaw::Gaussian && !(spec.sigma > 0.0))
        throw InvalidConfig("sample_initial: sigma must be > 0");

    const int N = sys.N, n = sys.n;
    SplitMix64 rng(spec.seed);
    EnsembleState s = EnsembleState::zeros(N, n);

    auto draw_positions = [&]() {
        for (int i = 0; i < N; ++i)
            for (int k = 0; k < n; ++k) {
                double c = spec.position == PositionLaw::UniformTorus
                               ? rng.uniform(0.0, sys.domain.period)
                               : rng.uniform(-spec.box_half_width, spec.box_half_width);
                s.pos(i)[k] = c;
            }
    };
    draw_positions();
    if (spec.min_pair_separation > 0.0) {
        int attempts = 0;
        auto min_sep_ok = [&]() {
            for (int i = 0; i < N; ++i)
                for (int j = i + 1; j < N; ++j)
                    if (std::sqrt(distance2_flat(s.pos(i), s.pos(j), n, sys.domain)) <
                        spec.min_pair_separation)
                        return false;
            return true;
        };
        while (!min_sep_ok()) {
            if (++attempts > 100000)
                throw InvalidConfig("sample_initial: could not satisfy min_pair_separation");
            draw_positions();
        }
    }

    for (int i = 0; i < N; ++i) {
        if (spec.velocity == VelocityLaw::Gaussian) {
            for (int k = 0; k < n; ++k) s.vel(i)[k] = spec.sigma * rng.gaussian();
        } else {
            double g[64];
            double g2 = 0.0;
            do {
                g2 = 0.0;
                for (int k = 0; k < n; ++k) {
                    g[k] = rng.gaussian();
                    g2 += g[k] * g[k];
                }
            } while (g2 < 1e-300);
            double radius = spec.v_max * std::pow(rng.uniform01(), 1.0 / n);
            double scale = radius / std::sqrt(g2);
            for (int k = 0; k < n; ++k) s.vel(i)[k] = scale * g[k];
        }
    }

    if (spec.galilean_center) s = galilean_project(s, sys);
    return s;
}

RateFit fit_decay_rate(std::span<const double> times, std::span<const double> ys, double w0,
                       double w1) {
    if (times.size() != ys.size()) throw InvalidConfig("fit_decay_rate: length mismatch");
    RateFit fit;
    std::vector<double> t, ly;
    for (size_t i = 0; i < times.size(); ++i) {
        if (times[i] < w0 || times[i] > w1) continue;
        double y = ys[i];
        if (y <= 0.0) {
            y = 1e-30;
            fit.clipped = true;
        }
        t.push_back(times[i]);
        ly.push_back(std::log(y));
    }
    fit.samples = static_cast<int>(t.size());
    if (fit.samples < 4) throw InvalidConfig("fit_decay_rate: fewer than 4 samples in window");

    auto regress = [](const std::vector<double>& xs, const std::vector<double>& ys_,
                      double& slope, double& rms) {
        double xm = 0.0, ym = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            xm += xs[i];
            ym += ys_[i];
        }
        xm /= static_cast<double>(xs.size());
        ym /= static_cast<double>(xs.size());
        double sxx = 0.0, sxy = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            sxx += (xs[i] - xm) * (xs[i] - xm);
            sxy += (xs[i] - xm) * (ys_[i] - ym);
        }
        slope = sxx > 0.0 ? sxy / sxx : 0.0;
        double ss = 0.0;
        for (size_t i = 0; i < xs.size(); ++i) {
            double r = (ys_[i] - ym) - slope * (xs[i] - xm);
            ss += r * r;
        }
        rms = std::sqrt(ss / static_cast<double>(xs.size()));
    };

    regress(t, ly, fit.exp_rate, fit.exp_residual);
    std::vector<double> lt(t.size());
    for (size_t i = 0; i < t.size(); ++i) lt[i] = std::log1p(t[i]);
    regress(lt, ly, fit.power_slope, fit.power_residual);
    return fit;
}

TrialSummary run_trial(const SystemSpec& sys, const SampleSpec& spec,
                       const IntegrationParams& params, const TrialThresholds& thresholds) {
    EnsembleState s0 = sample_initial(spec, sys);
    IntegrationParams p = params;
    p.pair_eps = thresholds.pair_eps;
    TrajectoryRecord rec = integrate(s0, sys, p);
    TrialSummary sum = summarize_trial(s0, rec, sys, thresholds);
    sum.seed = spec.seed;
    return sum;
}

TrialSummary summarize_trial(const EnsembleState& s0, const TrajectoryRecord& rec,
                             const SystemSpec& sys, const TrialThresholds& thresholds) {
    TrialSummary sum;
    sum.T = rec.times.empty() ? 0.0 : rec.times.back() - rec.times.front();
    sum.V2_initial = quadratic_variation(s0);
    double align0 = alignment_diameter(s0);

    sum.blew_up = rec.blew_up;
    sum.blowup_time = rec.blowup_time;
    const EnsembleState& fin = rec.final_state();
    sum.V2_final = quadratic_variation(fin);
    sum.V1_final = one_variation(fin);
    sum.align_diam_final = alignment_diameter(fin);
    sum.acc_phi = fin.acc_phi;
    sum.acc_diss = fin.acc_diss;
    sum.acc_i1 = fin.acc_i1;
    sum.min_pair_dist = rec.min_pair_dist;

    if (!sum.blew_up) {
        sum.aligned = sum.V2_final <= thresholds.eps_align * std::max(sum.V2_initial, 1.0);
        double min_pair_speed = std::numeric_limits<double>::infinity();
        for (int i = 0; i < fin.N; ++i)
            for (int j = i + 1; j < fin.N; ++j) {
                double d2 = 0.0;
                for (int k = 0; k < fin.n; ++k) {
                    double c = fin.vel(i)[k] - fin.vel(j)[k];
                    d2 += c * c;
                }
                min_pair_speed = std::min(min_pair_speed, std::sqrt(d2));
            }
        sum.pair_aligned = min_pair_speed <= thresholds.eps_align;
    }
    sum.H_flag = sum.min_pair_dist >= sys.kernel.support_radius();
    sum.interaction_threshold =
        sum.V2_initial > 0.0
            ? std::log(sum.V2_initial / (thresholds.eps_align * std::max(sum.V2_initial, 1.0)))
            : 0.0;

    sum.census_eps_v =
        std::max(thresholds.eps_cluster_rel * align0, thresholds.eps_cluster_floor);
    ClusterCensus census = cluster_census(fin, sys, sum.census_eps_v,
                                          {thresholds.relation_tol, thresholds.relation_bound});
    sum.cluster_count = census.K;
    sum.separation_ok = census.separation_ok;
    sum.relation_certificates = static_cast<int>(census.certificates.size());

    std::vector<double> ad(rec.samples.size());
    for (size_t i = 0; i < rec.samples.size(); ++i) ad[i] = rec.samples[i].align_diam;
    double t0 = rec.times.front(), t1 = rec.times.back();
    try {
        sum.align_fit = fit_decay_rate(rec.times, ad, t0 + 0.1 * (t1 - t0), t1);
        sum.fit_valid = true;
    } catch (const InvalidConfig&) {
        sum.fit_valid = false;
    }
    return sum;
}

WilsonInterval wilson95(int successes, int trials) {
    if (trials <= 0) return {0.0, 1.0};
    const double z = 1.959963984540054;
    double nn = static_cast<double>(trials);
    double p = static_cast<double>(successes) / nn;
    double z2 = z * z;
    double denom = 1.0 + z2 / nn;
    double center = (p + z2 / (2.0 * nn)) / denom;
    double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

SweepReport aggregate_summaries(std::vector<TrialSummary> summaries, uint64_t master_seed,
                                int n) {
    std::sort(summaries.begin(), summaries.end(),
              [](const TrialSummary& a, const TrialSummary& b) {
                  return a.trial_index < b.trial_index;
              });
    SweepReport rep;
    rep.trials = static_cast<int>(summaries.size());
    rep.master_seed = master_seed;
    int aligned = 0, pair_aligned = 0, hflag = 0;
    std::map<int, int> hist;
    int le2n = 0;
    for (const auto& s : summaries) {
        if (s.blew_up) {
            ++rep.blowups;
            continue;
        }
        aligned += s.aligned ? 1 : 0;
        pair_aligned += s.pair_aligned ? 1 : 0;
        hflag += s.H_flag ? 1 : 0;
        ++hist[s.cluster_count];
        le2n += s.cluster_count <= 2 * n ? 1 : 0;
    }
    double nn = std::max(1, rep.trials);
    rep.aligned_fraction = aligned / nn;
    rep.aligned_ci = wilson95(aligned, rep.trials);
    rep.pair_aligned_fraction = pair_aligned / nn;
    rep.pair_aligned_ci = wilson95(pair_aligned, rep.trials);
    rep.h_flag_fraction = hflag / nn;
    for (const auto& [k, c] : hist) rep.cluster_histogram.emplace_back(k, c);
    rep.frac_clusters_le_2n = le2n / nn;
    rep.summaries = std::move(summaries);
    return rep;
}

SweepReport run_sweep(const SystemSpec& sys, const SampleSpec& sample_template,
                      const IntegrationParams& params, const TrialThresholds& thresholds,
                      int trials, uint64_t master_seed, int parallelism) {
    if (trials < 1) throw InvalidConfig("run_sweep: trials must be >= 1");
    sys.validate();

    std::vector<TrialSummary> summaries(static_cast<size_t>(trials));
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto worker = [&]() {
        while (true) {
            int i = next.fetch_add(1);
            if (i >= trials) return;
            try {
                SampleSpec spec = sample_template;
                spec.seed = mix64(master_seed ^ static_cast<uint64_t>(i));
                TrialSummary s = run_trial(sys, spec, params, thresholds);
                s.trial_index = i;
                summaries[static_cast<size_t>(i)] = s;
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };

    int workers = parallelism > 0 ? parallelism
                                  : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    workers = std::min(workers, trials);
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (error) std::rethrow_exception(error);

    return aggregate_summaries(std::move(summaries), master_seed, sys.n);
}

} // namespace cslab
