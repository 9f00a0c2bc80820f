#include "cslab/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace {

void ensure_parent_dir(const std::string& path) {
    std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
}

} // namespace

#include "cslab/version.hpp"

namespace cslab {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& ctx) {
    if (!j.is_object()) throw InvalidConfig(ctx + ": expected a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok) throw InvalidConfig(ctx + ": unknown key '" + it.key() + "'");
    }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("field '") + key + "': " + e.what());
    }
}

template <typename T>
T get_required(const json& j, const char* key, const std::string& ctx) {
    if (!j.contains(key)) throw InvalidConfig(ctx + ": missing required key '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw InvalidConfig(ctx + "." + key + ": " + e.what());
    }
}

KernelSpec parse_kernel(const json& j) {
    check_keys(j, {"type", "amp", "r0", "r_flat", "beta"}, "system.kernel");
    std::string type = get_required<std::string>(j, "type", "system.kernel");
    if (type == "smooth_bump")
        return KernelSpec::smooth_bump(get_required<double>(j, "r0", "kernel"),
                                       get_or<double>(j, "amp", 1.0));
    if (type == "plateau")
        return KernelSpec::plateau(get_or<double>(j, "amp", 1.0),
                                   get_required<double>(j, "r_flat", "kernel"),
                                   get_required<double>(j, "r0", "kernel"));
    if (type == "constant") return KernelSpec::constant(get_or<double>(j, "amp", 1.0));
    if (type == "power_tail")
        return KernelSpec::power_tail(get_or<double>(j, "amp", 1.0),
                                      get_required<double>(j, "beta", "kernel"));
    if (type == "zero") return KernelSpec::zero();
    throw InvalidConfig("system.kernel: unknown type '" + type + "'");
}

json kernel_to_json(const KernelSpec& k) {
    json j;
    switch (k.kind) {
        case KernelSpec::Kind::SmoothBump:
            j["type"] = "smooth_bump";
            j["r0"] = k.r0;
            j["amp"] = k.amp;
            break;
        case KernelSpec::Kind::Plateau:
            j["type"] = "plateau";
            j["amp"] = k.amp;
            j["r_flat"] = k.r_flat;
            j["r0"] = k.r0;
            break;
        case KernelSpec::Kind::Constant:
            j["type"] = "constant";
            j["amp"] = k.amp;
            break;
        case KernelSpec::Kind::PowerTail:
            j["type"] = "power_tail";
            j["amp"] = k.amp;
            j["beta"] = k.beta;
            break;
        case KernelSpec::Kind::Zero: j["type"] = "zero"; break;
    }
    return j;
}

PotentialSpec parse_potential(const json& j) {
    check_keys(j, {"type", "l0", "l1"}, "force.potential");
    std::string type = get_required<std::string>(j, "type", "force.potential");
    if (type == "quadratic_confinement") return PotentialSpec::quadratic_confinement();
    if (type == "quadratic_well")
        return PotentialSpec::quadratic_well(get_required<double>(j, "l0", "potential"));
    if (type == "interval_well")
        return PotentialSpec::interval_well(get_required<double>(j, "l0", "potential"),
                                            get_required<double>(j, "l1", "potential"));
    if (type == "none") return PotentialSpec::none();
    throw InvalidConfig("force.potential: unknown type '" + type + "'");
}

json potential_to_json(const PotentialSpec& p) {
    json j;
    switch (p.kind) {
        case PotentialSpec::Kind::None: j["type"] = "none"; break;
        case PotentialSpec::Kind::QuadraticConfinement: j["type"] = "quadratic_confinement"; break;
        case PotentialSpec::Kind::QuadraticWell:
            j["type"] = "quadratic_well";
            j["l0"] = p.l0;
            break;
        case PotentialSpec::Kind::IntervalWell:
            j["type"] = "interval_well";
            j["l0"] = p.l0;
            j["l1"] = p.l1;
            break;
    }
    return j;
}

SystemSpec parse_system(const json& j) {
    check_keys(j, {"domain", "N", "kernel", "force", "masses"}, "system");
    SystemSpec sys;

    const json& dj = j.contains("domain") ? j.at("domain") : json::object();
    check_keys(dj, {"type", "n", "period"}, "system.domain");
    std::string dtype = get_required<std::string>(dj, "type", "system.domain");
    int n = get_required<int>(dj, "n", "system.domain");
    if (dtype == "torus")
        sys.domain = Domain::torus(n, get_or<double>(dj, "period", kTwoPi));
    else if (dtype == "open")
        sys.domain = Domain::open(n);
    else
        throw InvalidConfig("system.domain: unknown type '" + dtype + "'");
    sys.n = n;

    sys.N = get_required<int>(j, "N", "system");
    sys.kernel = parse_kernel(j.contains("kernel") ? j.at("kernel") : json{{"type", "zero"}});

    if (j.contains("force")) {
        const json& fj = j.at("force");
        check_keys(fj, {"type", "potential"}, "system.force");
        std::string ftype = get_required<std::string>(fj, "type", "system.force");
        if (ftype == "none") {
            sys.force = ForceMode::NoForce;
        } else if (ftype == "confinement" || ftype == "pairwise") {
            sys.force = ftype == "confinement" ? ForceMode::Confinement : ForceMode::Pairwise;
            if (!fj.contains("potential"))
                throw InvalidConfig("system.force: potential required for mode '" + ftype + "'");
            sys.potential = parse_potential(fj.at("potential"));
        } else {
            throw InvalidConfig("system.force: unknown type '" + ftype + "'");
        }
    }
    if (j.contains("masses")) {
        try {
            sys.masses = j.at("masses").get<std::vector<double>>();
        } catch (const json::exception& e) {
            throw InvalidConfig(std::string("system.masses: ") + e.what());
        }
    }
    sys.validate();
    return sys;
}

SampleSpec parse_sampling(const json& j) {
    check_keys(j,
               {"position", "box_half_width", "velocity", "v_max", "sigma", "galilean_center",
                "seed", "min_pair_separation"},
               "sampling");
    SampleSpec s;
    std::string pos = get_or<std::string>(j, "position", "uniform_torus");
    if (pos == "uniform_torus")
        s.position = PositionLaw::UniformTorus;
    else if (pos == "uniform_box")
        s.position = PositionLaw::UniformBox;
    else
        throw InvalidConfig("sampling.position: unknown law '" + pos + "'");
    s.box_half_width = get_or<double>(j, "box_half_width", 1.0);
    std::string vel = get_or<std::string>(j, "velocity", "ball");
    if (vel == "ball")
        s.velocity = VelocityLaw::UniformBall;
    else if (vel == "gaussian")
        s.velocity = VelocityLaw::Gaussian;
    else
        throw InvalidConfig("sampling.velocity: unknown law '" + vel + "'");
    s.v_max = get_or<double>(j, "v_max", 1.0);
    s.sigma = get_or<double>(j, "sigma", 1.0);
    s.galilean_center = get_or<bool>(j, "galilean_center", false);
    s.seed = get_or<uint64_t>(j, "seed", 0);
    s.min_pair_separation = get_or<double>(j, "min_pair_separation", 0.0);
    return s;
}

} // namespace

RunConfig parse_config(const json& j) {
    check_keys(j,
               {"system", "integration", "sampling", "sweep", "thresholds", "sticky", "output"},
               "config");
    RunConfig c;
    if (!j.contains("system")) throw InvalidConfig("config: missing required block 'system'");
    c.system = parse_system(j.at("system"));

    if (j.contains("integration")) {
        const json& ij = j.at("integration");
        check_keys(ij, {"h", "T", "sample_every", "wrap", "pair_eps"}, "integration");
        c.integration.h = get_or<double>(ij, "h", 1e-3);
        c.integration.T = get_or<double>(ij, "T", 10.0);
        c.integration.sample_every = get_or<int>(ij, "sample_every", 100);
        c.integration.wrap = get_or<bool>(ij, "wrap", true);
        c.integration.pair_eps = get_or<double>(ij, "pair_eps", 0.1);
        if (!(c.integration.h > 0.0)) throw InvalidConfig("integration.h must be > 0");
        if (!(c.integration.T >= 0.0)) throw InvalidConfig("integration.T must be >= 0");
        if (c.integration.sample_every < 1)
            throw InvalidConfig("integration.sample_every must be >= 1");
    }
    if (j.contains("sampling")) c.sampling = parse_sampling(j.at("sampling"));
    if (j.contains("sweep")) {
        const json& sj = j.at("sweep");
        check_keys(sj, {"trials", "master_seed", "parallelism"}, "sweep");
        c.sweep_trials = get_or<int>(sj, "trials", 100);
        c.master_seed = get_or<uint64_t>(sj, "master_seed", 1);
        c.parallelism = get_or<int>(sj, "parallelism", 0);
        if (c.sweep_trials < 1) throw InvalidConfig("sweep.trials must be >= 1");
    }
    if (j.contains("thresholds")) {
        const json& tj = j.at("thresholds");
        check_keys(tj,
                   {"eps_align", "eps_cluster_rel", "eps_cluster_floor", "relation_tol",
                    "relation_bound", "pair_eps"},
                   "thresholds");
        c.thresholds.eps_align = get_or<double>(tj, "eps_align", 1e-3);
        c.thresholds.eps_cluster_rel = get_or<double>(tj, "eps_cluster_rel", 1e-3);
        c.thresholds.eps_cluster_floor = get_or<double>(tj, "eps_cluster_floor", 1e-8);
        c.thresholds.relation_tol = get_or<double>(tj, "relation_tol", 1e-9);
        c.thresholds.relation_bound = get_or<long long>(tj, "relation_bound", 100);
        c.thresholds.pair_eps = get_or<double>(tj, "pair_eps", 0.1);
    }
    if (j.contains("sticky")) {
        const json& kj = j.at("sticky");
        check_keys(kj, {"r0", "t_max", "tau_event", "tau_geom"}, "sticky");
        c.sticky_r0 = get_or<double>(kj, "r0", 0.5);
        c.sticky.t_max = get_or<double>(kj, "t_max", 1e4);
        c.sticky.tau_event = get_or<double>(kj, "tau_event", 1e-9);
        c.sticky.tau_geom = get_or<double>(kj, "tau_geom", 1e-9);
    }
    if (j.contains("output")) {
        const json& oj = j.at("output");
        check_keys(oj, {"dir", "prefix"}, "output");
        c.out_dir = get_or<std::string>(oj, "dir", "out");
        c.prefix = get_or<std::string>(oj, "prefix", "run");
    }
    return c;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidConfig("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw InvalidConfig(std::string("config parse error: ") + e.what());
    }
    return parse_config(j);
}

json config_to_json(const RunConfig& c) {
    json j;
    json dj;
    dj["type"] = c.system.domain.is_torus() ? "torus" : "open";
    dj["n"] = c.system.domain.dim;
    if (c.system.domain.is_torus()) dj["period"] = c.system.domain.period;
    j["system"]["domain"] = dj;
    j["system"]["N"] = c.system.N;
    j["system"]["kernel"] = kernel_to_json(c.system.kernel);
    json fj;
    fj["type"] = c.system.force == ForceMode::NoForce
                     ? "none"
                     : (c.system.force == ForceMode::Confinement ? "confinement" : "pairwise");
    if (c.system.force != ForceMode::NoForce)
        fj["potential"] = potential_to_json(c.system.potential);
    j["system"]["force"] = fj;
    if (!c.system.masses.empty()) j["system"]["masses"] = c.system.masses;

    j["integration"] = {{"h", c.integration.h},
                        {"T", c.integration.T},
                        {"sample_every", c.integration.sample_every},
                        {"wrap", c.integration.wrap},
                        {"pair_eps", c.integration.pair_eps}};
    j["sampling"] = {
        {"position", c.sampling.position == PositionLaw::UniformTorus ? "uniform_torus" : "uniform_box"},
        {"box_half_width", c.sampling.box_half_width},
        {"velocity", c.sampling.velocity == VelocityLaw::UniformBall ? "ball" : "gaussian"},
        {"v_max", c.sampling.v_max},
        {"sigma", c.sampling.sigma},
        {"galilean_center", c.sampling.galilean_center},
        {"seed", c.sampling.seed},
        {"min_pair_separation", c.sampling.min_pair_separation}};
    j["sweep"] = {{"trials", c.sweep_trials},
                  {"master_seed", c.master_seed},
                  {"parallelism", c.parallelism}};
    j["thresholds"] = {{"eps_align", c.thresholds.eps_align},
                       {"eps_cluster_rel", c.thresholds.eps_cluster_rel},
                       {"eps_cluster_floor", c.thresholds.eps_cluster_floor},
                       {"relation_tol", c.thresholds.relation_tol},
                       {"relation_bound", c.thresholds.relation_bound},
                       {"pair_eps", c.thresholds.pair_eps}};
    j["sticky"] = {{"r0", c.sticky_r0},
                   {"t_max", c.sticky.t_max},
                   {"tau_event", c.sticky.tau_event},
                   {"tau_geom", c.sticky.tau_geom}};
    j["output"] = {{"dir", c.out_dir}, {"prefix", c.prefix}};
    return j;
}

json trial_to_json(const TrialSummary& s) {
    json j;
    j["trial_index"] = s.trial_index;
    j["seed"] = s.seed;
    j["blew_up"] = s.blew_up;
    j["blowup_time"] = s.blowup_time;
    j["T"] = s.T;
    j["V2_initial"] = s.V2_initial;
    j["V2_final"] = s.V2_final;
    j["V1_final"] = s.V1_final;
    j["align_diam_final"] = s.align_diam_final;
    j["aligned"] = s.aligned;
    j["pair_aligned"] = s.pair_aligned;
    j["acc_phi"] = s.acc_phi;
    j["acc_diss"] = s.acc_diss;
    j["acc_i1"] = s.acc_i1;
    j["min_pair_dist"] = s.min_pair_dist;
    j["H_flag"] = s.H_flag;
    j["interaction_threshold"] = s.interaction_threshold;
    j["cluster_count"] = s.cluster_count;
    j["separation_ok"] = s.separation_ok;
    j["relation_certificates"] = s.relation_certificates;
    j["census_eps_v"] = s.census_eps_v;
    j["fit_valid"] = s.fit_valid;
    if (s.fit_valid) {
        j["fit"] = {{"exp_rate", s.align_fit.exp_rate},
                    {"power_slope", s.align_fit.power_slope},
                    {"exp_residual", s.align_fit.exp_residual},
                    {"power_residual", s.align_fit.power_residual},
                    {"clipped", s.align_fit.clipped},
                    {"samples", s.align_fit.samples}};
    }
    return j;
}

TrialSummary trial_from_json(const json& j) {
    TrialSummary s;
    s.trial_index = j.at("trial_index").get<int>();
    s.seed = j.at("seed").get<uint64_t>();
    s.blew_up = j.at("blew_up").get<bool>();
    s.blowup_time = j.at("blowup_time").get<double>();
    s.T = j.at("T").get<double>();
    s.V2_initial = j.at("V2_initial").get<double>();
    s.V2_final = j.at("V2_final").get<double>();
    s.V1_final = j.at("V1_final").get<double>();
    s.align_diam_final = j.at("align_diam_final").get<double>();
    s.aligned = j.at("aligned").get<bool>();
    s.pair_aligned = j.at("pair_aligned").get<bool>();
    s.acc_phi = j.at("acc_phi").get<double>();
    s.acc_diss = j.at("acc_diss").get<double>();
    s.acc_i1 = j.at("acc_i1").get<double>();
    s.min_pair_dist = j.at("min_pair_dist").get<double>();
    s.H_flag = j.at("H_flag").get<bool>();
    s.interaction_threshold = j.at("interaction_threshold").get<double>();
    s.cluster_count = j.at("cluster_count").get<int>();
    s.separation_ok = j.at("separation_ok").get<bool>();
    s.relation_certificates = j.at("relation_certificates").get<int>();
    s.census_eps_v = j.at("census_eps_v").get<double>();
    s.fit_valid = j.at("fit_valid").get<bool>();
    if (s.fit_valid) {
        const json& f = j.at("fit");
        s.align_fit.exp_rate = f.at("exp_rate").get<double>();
        s.align_fit.power_slope = f.at("power_slope").get<double>();
        s.align_fit.exp_residual = f.at("exp_residual").get<double>();
        s.align_fit.power_residual = f.at("power_residual").get<double>();
        s.align_fit.clipped = f.at("clipped").get<bool>();
        s.align_fit.samples = f.at("samples").get<int>();
    }
    return s;
}

json sweep_report_to_json(const SweepReport& rep, const RunConfig& c) {
    json j;
    j["version"] = kVersion;
    j["config"] = config_to_json(c);
    j["trials"] = rep.trials;
    j["master_seed"] = rep.master_seed;
    j["blowups"] = rep.blowups;
    j["aligned_fraction"] = rep.aligned_fraction;
    j["aligned_ci95"] = {rep.aligned_ci.lo, rep.aligned_ci.hi};
    j["pair_aligned_fraction"] = rep.pair_aligned_fraction;
    j["pair_aligned_ci95"] = {rep.pair_aligned_ci.lo, rep.pair_aligned_ci.hi};
    j["h_flag_fraction"] = rep.h_flag_fraction;
    json hist = json::array();
    for (const auto& [k, cnt] : rep.cluster_histogram)
        hist.push_back({{"clusters", k}, {"count", cnt}});
    j["cluster_histogram"] = hist;
    j["frac_clusters_le_2n"] = rep.frac_clusters_le_2n;
    return j;
}

json sticky_record_to_json(const StickyRecord& rec, const RunConfig& c) {
    json j;
    j["version"] = kVersion;
    j["config"] = config_to_json(c);
    j["reached_single_cluster"] = rec.reached_single_cluster;
    j["initial_clusters"] = rec.initial.clusters.size();
    j["final_time"] = rec.final_clusters.t;
    json evs = json::array();
    for (const auto& e : rec.events) {
        json ej;
        ej["t"] = e.time;
        ej["groups"] = e.merged_groups;
        ej["velocities_before"] = e.velocities_before;
        ej["masses_before"] = e.masses_before;
        ej["velocity_after"] = e.velocity_after;
        json wp = json::array();
        for (const auto& [a, b] : e.witness_pairs) wp.push_back({a, b});
        ej["witness_pairs"] = wp;
        evs.push_back(ej);
    }
    j["events"] = evs;
    json fc = json::array();
    for (const auto& cl : rec.final_clusters.clusters) {
        json cj;
        cj["members"] = cl.members;
        cj["mass"] = cl.mass;
        cj["anchor"] = cl.anchor;
        cj["velocity"] = cl.velocity;
        fc.push_back(cj);
    }
    j["final_clusters"] = fc;
    return j;
}

json relation_result_to_json(const RelationResult& r) {
    json j;
    j["version"] = kVersion;
    j["found"] = r.found;
    if (r.found) {
        j["q"] = r.q;
        j["residual"] = r.residual;
    } else {
        j["certified_bound"] = r.certified_bound;
    }
    return j;
}

json validation_report_to_json(const ValidationReport& r) {
    json j;
    j["version"] = kVersion;
    j["pass"] = r.pass();
    j["sign_condition_ok"] = r.sign_ok;
    j["worst_sign_product"] = r.worst_sign_product;
    j["worst_sign_r"] = r.worst_sign_r;
    j["c_R"] = std::isinf(r.c_R) ? json("inf") : json(r.c_R);
    j["c_R_r"] = r.c_R_r;
    j["c_R_ok"] = r.c_R_ok;
    j["tolerance"] = r.tolerance;
    j["R"] = r.R;
    j["grid"] = r.grid;
    return j;
}

json rate_fit_to_json(const RateFit& f) {
    json j;
    j["version"] = kVersion;
    j["exp_rate"] = f.exp_rate;
    j["power_slope"] = f.power_slope;
    j["exp_residual"] = f.exp_residual;
    j["power_residual"] = f.power_residual;
    j["clipped"] = f.clipped;
    j["samples"] = f.samples;
    return j;
}

std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void write_timeseries_csv(const std::string& path, const TrajectoryRecord& rec,
                          const RunConfig& c) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw InvalidConfig("cannot open output file: " + path);
    out << "# version " << kVersion << "\n";
    out << "# config " << config_to_json(c).dump() << "\n";
    bool pair = !rec.samples.empty() && rec.samples.front().has_pair;
    out << "t,V2,V1,I1,diss_rate,E,K,P,align_diam,flock_diam,acc_phi,acc_diss,acc_I1";
    if (pair) out << ",chi,mod_energy,pair_energy";
    out << "\n";
    for (size_t i = 0; i < rec.samples.size(); ++i) {
        const DiagnosticsSample& d = rec.samples[i];
        const EnsembleState& s = rec.states[i];
        out << format_float(d.t) << ',' << format_float(d.V2) << ',' << format_float(d.V1)
            << ',' << format_float(d.I1) << ',' << format_float(d.diss_rate) << ','
            << format_float(d.E) << ',' << format_float(d.K) << ',' << format_float(d.P) << ','
            << format_float(d.align_diam) << ',' << format_float(d.flock_diam) << ','
            << format_float(s.acc_phi) << ',' << format_float(s.acc_diss) << ','
            << format_float(s.acc_i1);
        if (pair)
            out << ',' << format_float(d.chi) << ',' << format_float(d.modified_energy) << ','
                << format_float(d.pair_energy);
        out << "\n";
    }
}

void write_cluster_count_csv(const std::string& path, const StickyRecord& rec,
                             const RunConfig& c) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw InvalidConfig("cannot open output file: " + path);
    out << "# version " << kVersion << "\n";
    out << "# config " << config_to_json(c).dump() << "\n";
    out << "t,cluster_count\n";
    size_t count = rec.initial.clusters.size();
    out << format_float(rec.initial.t) << ',' << count << "\n";
    for (const auto& e : rec.events) {
        count -= e.merged_groups.size() - 1;
        out << format_float(e.time) << ',' << count << "\n";
    }
    out << format_float(rec.final_clusters.t) << ',' << rec.final_clusters.clusters.size()
        << "\n";
}

void write_text_file(const std::string& path, const std::string& content) {
    ensure_parent_dir(path);
    std::ofstream out(path);
    if (!out) throw InvalidConfig("cannot open output file: " + path);
    out << content;
}

} // namespace cslab
