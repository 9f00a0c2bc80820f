#include <doctest.h>

#include <cmath>

#include "cslab/integrator.hpp"
#include "cslab/rng.hpp"

using namespace cslab;

namespace {

SystemSpec open_sys(int N, int n, ForceMode mode, PotentialSpec pot, KernelSpec k) {
    SystemSpec sys;
    sys.domain = Domain::open(n);
    sys.kernel = k;
    sys.force = mode;
    sys.potential = pot;
    sys.N = N;
    sys.n = n;
    return sys;
}

} // namespace

TEST_CASE("variation functionals on a two-agent state") {
    EnsembleState s = EnsembleState::zeros(2, 1);
    s.v = {1.0, -1.0};
    CHECK(quadratic_variation(s) == doctest::Approx(8.0)); // two ordered pairs x 4
    CHECK(one_variation(s) == doctest::Approx(4.0));

    SystemSpec sys;
    sys.domain = Domain::torus(1);
    sys.kernel = KernelSpec::constant(1.0);
    sys.N = 2;
    sys.n = 1;
    CHECK(dissipation_rate(s, sys) == doctest::Approx(-16.0));
    CHECK(i1_functional(s, sys) == doctest::Approx(2.0));

    EnsembleState eq = EnsembleState::zeros(3, 2);
    eq.v = {0.5, 0.5, 0.5, 0.5, 0.5, 0.5};
    SystemSpec sys3;
    sys3.domain = Domain::torus(2);
    sys3.kernel = KernelSpec::constant(1.0);
    sys3.N = 3;
    sys3.n = 2;
    CHECK(quadratic_variation(eq) == 0.0);
    CHECK(one_variation(eq) == 0.0);
    CHECK(i1_functional(eq, sys3) == 0.0);
    CHECK(dissipation_rate(eq, sys3) == 0.0);
}

TEST_CASE("V2 equals the centered second moment identity") {
    SplitMix64 rng(31);
    for (int rep = 0; rep < 20; ++rep) {
        int N = 2 + static_cast<int>(rng.next() % 7);
        int n = 1 + static_cast<int>(rng.next() % 3);
        EnsembleState s = EnsembleState::zeros(N, n);
        for (auto& c : s.v) c = rng.uniform(-2, 2);
        double v2 = quadratic_variation(s);
        double centered = 0.0;
        for (int k = 0; k < n; ++k) {
            double mean = 0.0;
            for (int i = 0; i < N; ++i) mean += s.vel(i)[k];
            mean /= N;
            for (int i = 0; i < N; ++i) {
                double c = s.vel(i)[k] - mean;
                centered += c * c;
            }
        }
        CHECK(std::fabs(v2 - 2.0 * N * centered) <= 1e-10 * std::max(1.0, v2));
    }
}

TEST_CASE("total energy per force mode") {
    SystemSpec conf = open_sys(2, 1, ForceMode::Confinement,
                               PotentialSpec::quadratic_confinement(), KernelSpec::zero());
    EnsembleState s = EnsembleState::zeros(2, 1);
    s.x = {1.0, -1.0};
    s.v = {2.0, 0.0};
    EnergyBreakdown e = total_energy(s, conf);
    CHECK(e.K == doctest::Approx(1.0));
    CHECK(e.P == doctest::Approx(0.5));
    CHECK(e.E == doctest::Approx(1.5));

    // rest at the potential minimum
    EnsembleState rest = EnsembleState::zeros(2, 1);
    CHECK(total_energy(rest, conf).E == 0.0);

    // interaction mode with coincident agents and U(0) = 0
    SystemSpec inter = open_sys(2, 1, ForceMode::Pairwise,
                                PotentialSpec::quadratic_confinement(), KernelSpec::zero());
    EnsembleState co = EnsembleState::zeros(2, 1);
    co.x = {0.7, 0.7};
    CHECK(total_energy(co, inter).P == 0.0);

    SystemSpec torus;
    torus.domain = Domain::torus(1);
    torus.N = 2;
    torus.n = 1;
    EnsembleState ts = EnsembleState::zeros(2, 1);
    CHECK_THROWS_AS(total_energy(ts, torus), Unsupported);
    SystemSpec noforce = open_sys(2, 1, ForceMode::NoForce, PotentialSpec::none(),
                                  KernelSpec::constant(1.0));
    CHECK_THROWS_AS(total_energy(s, noforce), Unsupported);
}

TEST_CASE("pair functionals") {
    SystemSpec conf = open_sys(2, 2, ForceMode::Confinement,
                               PotentialSpec::quadratic_confinement(), KernelSpec::constant(1.0));
    EnsembleState zero = EnsembleState::zeros(2, 2);
    PairFunctionals f0 = pair_functionals(zero, conf, 0.1);
    CHECK(f0.chi == 0.0);
    CHECK(f0.pair_energy == 0.0);
    CHECK(f0.modified_energy == 0.0);

    // orthogonal x12 and v12
    EnsembleState orth = EnsembleState::zeros(2, 2);
    orth.x = {1.0, 0.0, 0.0, 0.0};
    orth.v = {0.0, 1.0, 0.0, 0.0};
    CHECK(pair_functionals(orth, conf, 0.1).chi == 0.0);

    // aligned x12 and v12 with phi = 1 and eps = 0.1
    EnsembleState par = EnsembleState::zeros(2, 2);
    par.x = {1.0, 0.0, 0.0, 0.0};
    par.v = {1.0, 0.0, 0.0, 0.0};
    PairFunctionals fp = pair_functionals(par, conf, 0.1);
    CHECK(fp.pair_energy == doctest::Approx(2.0));
    CHECK(fp.chi == doctest::Approx(1.0));
    CHECK(fp.modified_energy == doctest::Approx(2.1));

    SystemSpec big = conf;
    big.N = 3;
    EnsembleState s3 = EnsembleState::zeros(3, 2);
    CHECK_THROWS_AS(pair_functionals(s3, big, 0.1), Unsupported);
}

TEST_CASE("finite differences of V2 match the dissipation rate along the flow") {
    SystemSpec sys;
    sys.domain = Domain::torus(2);
    sys.kernel = KernelSpec::smooth_bump(1.0, 1.0);
    sys.N = 4;
    sys.n = 2;
    SplitMix64 rng(41);
    EnsembleState s = EnsembleState::zeros(4, 2);
    for (auto& c : s.x) c = rng.uniform(0.0, kTwoPi);
    for (auto& c : s.v) c = rng.uniform(-1, 1);
    IntegrationParams p;
    p.h = 1e-3;
    p.T = 2.0;
    p.sample_every = 1;
    TrajectoryRecord rec = integrate(s, sys, p);
    for (size_t i = 2; i + 2 < rec.samples.size(); i += 50) {
        double fd = (-rec.samples[i + 2].V2 + 8.0 * rec.samples[i + 1].V2 -
                     8.0 * rec.samples[i - 1].V2 + rec.samples[i - 2].V2) /
                    (12.0 * p.h);
        double rate = rec.samples[i].diss_rate;
        CHECK(std::fabs(fd - rate) <= 1e-6 + 1e-4 * std::fabs(rate));
    }
}

TEST_CASE("energy dissipates at the derived constant in both force modes") {
    SplitMix64 rng(43);
    for (ForceMode mode : {ForceMode::Confinement, ForceMode::Pairwise}) {
        SystemSpec sys = open_sys(3, 2, mode,
                                  mode == ForceMode::Confinement
                                      ? PotentialSpec::quadratic_confinement()
                                      : PotentialSpec::quadratic_well(0.5),
                                  KernelSpec::smooth_bump(1.2, 1.0));
        EnsembleState s = EnsembleState::zeros(3, 2);
        for (auto& c : s.x) c = rng.uniform(-0.8, 0.8);
        for (auto& c : s.v) c = rng.uniform(-1, 1);
        IntegrationParams p;
        p.h = 1e-3;
        p.T = 1.0;
        p.sample_every = 1;
        TrajectoryRecord rec = integrate(s, sys, p);
        const double N = 3.0;
        for (size_t i = 2; i + 2 < rec.samples.size(); i += 37) {
            double fd = (-rec.samples[i + 2].E + 8.0 * rec.samples[i + 1].E -
                         8.0 * rec.samples[i - 1].E + rec.samples[i - 2].E) /
                        (12.0 * p.h);
            // diss_rate = -2 sum phi |dv|^2, so the law reads dE/dt = diss_rate/(4 N^2)
            double rate = rec.samples[i].diss_rate / (4.0 * N * N);
            CHECK(std::fabs(fd - rate) <= 1e-6 + 1e-4 * std::fabs(rate));
        }
    }
}

TEST_CASE("two-agent Lyapunov identities hold pointwise") {
    // confinement: d/dt(|v12|^2 + |x12|^2) = -2 phi |v12|^2
    SystemSpec conf = open_sys(2, 2, ForceMode::Confinement,
                               PotentialSpec::quadratic_confinement(),
                               KernelSpec::smooth_bump(1.0, 2.0));
    EnsembleState s = EnsembleState::zeros(2, 2);
    s.x = {0.3, 0.1, -0.2, -0.3};
    s.v = {0.4, -0.2, -0.1, 0.5};
    IntegrationParams p;
    p.h = 1e-3;
    p.T = 1.0;
    p.sample_every = 1;
    for (auto mode : {ForceMode::Confinement, ForceMode::Pairwise}) {
        SystemSpec sys = mode == ForceMode::Confinement
                             ? conf
                             : open_sys(2, 2, ForceMode::Pairwise,
                                        PotentialSpec::quadratic_well(0.4),
                                        KernelSpec::smooth_bump(1.0, 2.0));
        TrajectoryRecord rec = integrate(s, sys, p);
        for (size_t i = 2; i + 2 < rec.samples.size(); i += 23) {
            double fd = (-rec.samples[i + 2].pair_energy + 8.0 * rec.samples[i + 1].pair_energy -
                         8.0 * rec.samples[i - 1].pair_energy + rec.samples[i - 2].pair_energy) /
                        (12.0 * p.h);
            // for N = 2, -2 phi12 |v12|^2 = diss_rate / 2
            double rate = rec.samples[i].diss_rate / 2.0;
            CHECK(std::fabs(fd - rate) <= 1e-6 + 1e-4 * std::fabs(rate));
        }
    }
}

TEST_CASE("modified energy stays within the chi envelope") {
    SystemSpec sys = open_sys(2, 2, ForceMode::Confinement,
                              PotentialSpec::quadratic_confinement(),
                              KernelSpec::smooth_bump(1.0, 1.5));
    EnsembleState s = EnsembleState::zeros(2, 2);
    s.x = {0.25, 0.0, -0.25, 0.1};
    s.v = {0.5, -0.3, -0.5, 0.3};
    IntegrationParams p;
    p.h = 1e-3;
    p.T = 3.0;
    p.sample_every = 10;
    p.pair_eps = 0.05;
    TrajectoryRecord rec = integrate(s, sys, p);
    double sup_phi = 1.5;
    double max_diam = 0.0, max_align = 0.0;
    for (const auto& d : rec.samples) {
        max_diam = std::max(max_diam, d.flock_diam);
        max_align = std::max(max_align, d.align_diam);
    }
    double bound = 0.05 * sup_phi * max_diam * max_align;
    for (const auto& d : rec.samples)
        CHECK(std::fabs(d.modified_energy - d.pair_energy) <= bound + 1e-12);
}

TEST_CASE("cluster census thresholds and certificates") {
    SystemSpec sys;
    sys.domain = Domain::torus(1);
    sys.kernel = KernelSpec::smooth_bump(0.5, 1.0);
    sys.N = 3;
    sys.n = 1;

    EnsembleState all_equal = EnsembleState::zeros(3, 1);
    all_equal.v = {0.7, 0.7, 0.7};
    all_equal.x = {0.0, 2.0, 4.0};
    ClusterCensus c1 = cluster_census(all_equal, sys, 1e-3);
    CHECK(c1.K == 1);
    CHECK(c1.separation_ok);

    EnsembleState s = EnsembleState::zeros(3, 1);
    double eps = 1e-3;
    s.v = {0.0, eps / 2.0, 1.0};
    s.x = {0.0, 0.1, 3.0};
    ClusterCensus c2 = cluster_census(s, sys, eps);
    CHECK(c2.K == 2);
    CHECK(c2.groups[0] == std::vector<int>{0, 1});
    CHECK(c2.groups[1] == std::vector<int>{2});
    CHECK(c2.separation_ok); // 0.1 within a group, 2.9 across groups

    // groups with members inside the support radius fail the separation check
    EnsembleState close = EnsembleState::zeros(3, 1);
    close.v = {0.0, 1.0, 2.0};
    close.x = {0.0, 0.2, 3.0};
    ClusterCensus c4 = cluster_census(close, sys, eps);
    CHECK(c4.K == 3);
    CHECK_FALSE(c4.separation_ok);
}

TEST_CASE("census of a sticky final state reports the recorded cluster count") {
    // two far clusters with a planted rational velocity gap, one lone agent
    SystemSpec sys;
    sys.domain = Domain::torus(2);
    sys.kernel = KernelSpec::smooth_bump(0.5, 1.0);
    sys.N = 4;
    sys.n = 2;
    EnsembleState s = EnsembleState::zeros(4, 2);
    s.x = {0.0, 0.0, 0.1, 0.0, 3.0, 0.0, 0.0, 3.0};
    s.v = {0.5, 0.5, 0.5, 0.5, 1.5, -0.5, 0.25, 0.125};
    ClusterCensus c = cluster_census(s, sys, 1e-6);
    CHECK(c.K == 3);
    CHECK(c.groups[0] == std::vector<int>{0, 1});
    CHECK(c.separation_ok);
    // every pairwise velocity gap here is rational, so all three group pairs
    // carry certificates
    CHECK(c.certificates.size() == 3);
}

TEST_CASE("census attaches a Kronecker certificate exactly when one is planted") {
    SystemSpec sys;
    sys.domain = Domain::torus(2);
    sys.kernel = KernelSpec::smooth_bump(0.5, 1.0);
    sys.N = 2;
    sys.n = 2;

    // velocity gap (1, -1) carries the relation q = (1, 1)
    EnsembleState planted = EnsembleState::zeros(2, 2);
    planted.v = {1.0, 0.0, 0.0, 1.0};
    planted.x = {0.0, 0.0, 3.0, 3.0};
    ClusterCensus cp = cluster_census(planted, sys, 1e-3);
    CHECK(cp.K == 2);
    REQUIRE(cp.certificates.size() == 1);
    CHECK(cp.certificates[0].residual <= 1e-9);

    // gap (1, sqrt(2)) has no relation at bound 100
    EnsembleState irr = EnsembleState::zeros(2, 2);
    irr.v = {1.0, std::sqrt(2.0), 0.0, 0.0};
    irr.x = {0.0, 0.0, 3.0, 3.0};
    ClusterCensus ci = cluster_census(irr, sys, 1e-3);
    CHECK(ci.K == 2);
    CHECK(ci.certificates.empty());
}
