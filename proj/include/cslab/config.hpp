#pragma once
#include <string>

#include <json.hpp>

#include "cslab/harness.hpp"
#include "cslab/model.hpp"
#include "cslab/sticky.hpp"

namespace cslab {

/// One JSON document drives every subcommand; only "system" is required and
/// unknown keys are rejected wherever they appear.
struct RunConfig {
    SystemSpec system;
    IntegrationParams integration;
    SampleSpec sampling;
    int sweep_trials = 100;
    uint64_t master_seed = 1;
    int parallelism = 0; // 0 = hardware concurrency
    TrialThresholds thresholds;
    double sticky_r0 = 0.5;
    StickyParams sticky;
    std::string out_dir = "out";
    std::string prefix = "run";
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig load_config_file(const std::string& path);

/// Fully resolved configuration (defaults filled in); embedded in every
/// output for provenance.
nlohmann::json config_to_json(const RunConfig& c);

nlohmann::json trial_to_json(const TrialSummary& s);
TrialSummary trial_from_json(const nlohmann::json& j);

nlohmann::json sweep_report_to_json(const SweepReport& rep, const RunConfig& c);
nlohmann::json sticky_record_to_json(const StickyRecord& rec, const RunConfig& c);
nlohmann::json relation_result_to_json(const RelationResult& r);
nlohmann::json validation_report_to_json(const ValidationReport& r);
nlohmann::json rate_fit_to_json(const RateFit& f);

/// Fixed time-series schema:
///   t,V2,V1,I1,diss_rate,E,K,P,align_diam,flock_diam,acc_phi,acc_diss,acc_I1
/// plus ,chi,mod_energy,pair_energy when the pair diagnostics exist.
/// Floats carry 17 significant digits; '#'-prefixed provenance lines precede
/// the header.
void write_timeseries_csv(const std::string& path, const TrajectoryRecord& rec,
                          const RunConfig& c);
void write_cluster_count_csv(const std::string& path, const StickyRecord& rec,
                             const RunConfig& c);
void write_text_file(const std::string& path, const std::string& content);

std::string format_float(double v); // %.17g

} // namespace cslab
