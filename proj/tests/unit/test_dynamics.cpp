#include <doctest.h>

#include <cmath>

#include "cslab/dynamics.hpp"
#include "cslab/rng.hpp"

using namespace cslab;

namespace {

EnsembleState make_state(const SystemSpec& sys, const std::vector<double>& x,
                         const std::vector<double>& v) {
    EnsembleState s = EnsembleState::zeros(sys.N, sys.n);
    s.x = x;
    s.v = v;
    return s;
}

SystemSpec torus_sys(int N, int n, KernelSpec k) {
    SystemSpec sys;
    sys.domain = Domain::torus(n);
    sys.kernel = k;
    sys.N = N;
    sys.n = n;
    return sys;
}

} // namespace

TEST_CASE("alignment rhs on an in-range pair") {
    SystemSpec sys = torus_sys(2, 1, KernelSpec::constant(1.0));
    EnsembleState s = make_state(sys, {0.0, 0.5}, {1.0, -1.0});
    Deriv d = eval_rhs(s, sys);
    CHECK(d.dx[0] == 1.0);
    CHECK(d.dx[1] == -1.0);
    CHECK(d.dv[0] == doctest::Approx(-1.0)); // (1/2) * phi * (v2 - v1)
    CHECK(d.dv[1] == doctest::Approx(1.0));
    CHECK(d.dphi == doctest::Approx(2.0));
    CHECK(d.ddiss == doctest::Approx(8.0)); // 2 * phi * |v1-v2|^2
    CHECK(d.di1 == doctest::Approx(2.0));   // (1/2) * 2 * phi * |v1-v2|
}

TEST_CASE("pairwise potential rhs") {
    SystemSpec sys;
    sys.domain = Domain::open(1);
    sys.kernel = KernelSpec::zero();
    sys.force = ForceMode::Pairwise;
    sys.potential = PotentialSpec::quadratic_confinement(); // U = r^2/2 pair shape
    sys.N = 2;
    sys.n = 1;
    EnsembleState s = make_state(sys, {0.0, 1.0}, {0.0, 0.0});
    Deriv d = eval_rhs(s, sys);
    CHECK(d.dv[0] == doctest::Approx(0.5));  // -(1/2) grad U(x1-x2), grad U(-1) = -1
    CHECK(d.dv[1] == doctest::Approx(-0.5));
    CHECK(d.dphi == 0.0);
}

TEST_CASE("free flight rhs vanishes") {
    SystemSpec sys = torus_sys(3, 2, KernelSpec::zero());
    SplitMix64 rng(1);
    EnsembleState s = EnsembleState::zeros(3, 2);
    for (auto& c : s.x) c = rng.uniform(0.0, kTwoPi);
    for (auto& c : s.v) c = rng.uniform(-1.0, 1.0);
    Deriv d = eval_rhs(s, sys);
    for (double c : d.dv) CHECK(c == 0.0);
    CHECK(d.dphi == 0.0);
    CHECK(d.ddiss == 0.0);
    CHECK(d.di1 == 0.0);
}

TEST_CASE("divergence matches the hand-evaluated sums") {
    // both agents inside the flat region of a plateau with amplitude 1
    SystemSpec sys = torus_sys(2, 1, KernelSpec::plateau(1.0, 0.25, 0.5));
    EnsembleState s = make_state(sys, {0.0, 0.1}, {0.0, 0.0});
    CHECK(divergence(s, sys) == doctest::Approx(-1.0));

    // all pairs out of range
    EnsembleState far = make_state(sys, {0.0, 3.0}, {0.0, 0.0});
    CHECK(divergence(far, sys) == 0.0);

    // N = 3, n = 2, exactly one pair in range with phi = c
    SystemSpec sys3 = torus_sys(3, 2, KernelSpec::plateau(0.7, 0.3, 0.6));
    EnsembleState s3 = EnsembleState::zeros(3, 2);
    s3.x = {0.0, 0.0, 0.2, 0.0, 3.0, 3.0};
    CHECK(divergence(s3, sys3) == doctest::Approx(-(2.0 / 3.0) * 2.0 * 0.7));
}

TEST_CASE("divergence equals the trace of the ensemble-field Jacobian") {
    SystemSpec sys = torus_sys(3, 2, KernelSpec::smooth_bump(1.2, 0.8));
    SplitMix64 rng(99);
    for (int rep = 0; rep < 5; ++rep) {
        EnsembleState s = EnsembleState::zeros(3, 2);
        for (auto& c : s.x) c = rng.uniform(0.0, kTwoPi);
        for (auto& c : s.v) c = rng.uniform(-1.0, 1.0);

        const double step = 1e-6;
        double trace = 0.0;
        const size_t m = s.x.size();
        for (size_t c = 0; c < 2 * m; ++c) {
            EnsembleState sp = s, sm = s;
            if (c < m) {
                sp.x[c] += step;
                sm.x[c] -= step;
            } else {
                sp.v[c - m] += step;
                sm.v[c - m] -= step;
            }
            Deriv dp = eval_rhs(sp, sys);
            Deriv dm = eval_rhs(sm, sys);
            double fp = c < m ? dp.dx[c] : dp.dv[c - m];
            double fm = c < m ? dm.dx[c] : dm.dv[c - m];
            trace += (fp - fm) / (2.0 * step);
        }
        double div = divergence(s, sys);
        CHECK(std::fabs(trace - div) <= 1e-4 * std::max(1.0, std::fabs(div)));
    }
}

TEST_CASE("galilean projection centers the ensemble") {
    SystemSpec sys;
    sys.domain = Domain::open(1);
    sys.N = 2;
    sys.n = 1;
    EnsembleState s = make_state(sys, {1.0, 3.0}, {2.0, 4.0});
    s.acc_phi = 0.7;
    EnsembleState p = galilean_project(s, sys);
    CHECK(p.x == std::vector<double>{-1.0, 1.0});
    CHECK(p.v == std::vector<double>{-1.0, 1.0});
    CHECK(p.acc_phi == 0.7);

    // already centered -> unchanged
    EnsembleState q = galilean_project(p, sys);
    CHECK(q.x == p.x);
    CHECK(q.v == p.v);

    SplitMix64 rng(3);
    SystemSpec sys4;
    sys4.domain = Domain::open(3);
    sys4.N = 4;
    sys4.n = 3;
    EnsembleState r = EnsembleState::zeros(4, 3);
    for (auto& c : r.x) c = rng.uniform(-5, 5);
    for (auto& c : r.v) c = rng.uniform(-5, 5);
    Means m = conserved_means(galilean_project(r, sys4), sys4);
    for (double c : *m.x_mean) CHECK(std::fabs(c) <= 1e-15);
    for (double c : m.v_mean) CHECK(std::fabs(c) <= 1e-15);

    SystemSpec st = torus_sys(2, 1, KernelSpec::zero());
    EnsembleState ts = make_state(st, {0.0, 1.0}, {0.0, 0.0});
    CHECK_THROWS_AS(galilean_project(ts, st), Unsupported);
}

TEST_CASE("conserved means") {
    SystemSpec sys;
    sys.domain = Domain::open(1);
    sys.N = 2;
    sys.n = 1;
    EnsembleState s = make_state(sys, {-1.0, 3.0}, {1.0, 3.0});
    Means m = conserved_means(s, sys);
    CHECK(m.v_mean[0] == doctest::Approx(2.0));
    CHECK((*m.x_mean)[0] == doctest::Approx(1.0));

    SystemSpec st = torus_sys(2, 1, KernelSpec::zero());
    EnsembleState ts = make_state(st, {0.0, 1.0}, {1.0, 3.0});
    Means mt = conserved_means(ts, st);
    CHECK_FALSE(mt.x_mean.has_value());
    CHECK(mt.v_mean[0] == doctest::Approx(2.0));
}

TEST_CASE("rhs is permutation equivariant") {
    SystemSpec sys = torus_sys(4, 2, KernelSpec::smooth_bump(1.5, 1.0));
    SplitMix64 rng(11);
    EnsembleState s = EnsembleState::zeros(4, 2);
    for (auto& c : s.x) c = rng.uniform(0.0, kTwoPi);
    for (auto& c : s.v) c = rng.uniform(-1.0, 1.0);
    Deriv d = eval_rhs(s, sys);

    std::vector<int> perm = {2, 0, 3, 1};
    EnsembleState sp = EnsembleState::zeros(4, 2);
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 2; ++k) {
            sp.pos(i)[k] = s.pos(perm[static_cast<size_t>(i)])[k];
            sp.vel(i)[k] = s.vel(perm[static_cast<size_t>(i)])[k];
        }
    Deriv dp = eval_rhs(sp, sys);
    for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 2; ++k)
            CHECK(dp.dv[static_cast<size_t>(i) * 2 + k] ==
                  doctest::Approx(d.dv[static_cast<size_t>(perm[static_cast<size_t>(i)]) * 2 + k])
                      .epsilon(1e-14));
    CHECK(dp.dphi == doctest::Approx(d.dphi).epsilon(1e-14));
}

TEST_CASE("translation and Galilean invariance on open space") {
    SystemSpec sys;
    sys.domain = Domain::open(2);
    sys.kernel = KernelSpec::smooth_bump(1.0, 1.0);
    sys.force = ForceMode::Pairwise;
    sys.potential = PotentialSpec::quadratic_well(0.6);
    sys.N = 3;
    sys.n = 2;
    SplitMix64 rng(21);
    EnsembleState s = EnsembleState::zeros(3, 2);
    for (auto& c : s.x) c = rng.uniform(-1.0, 1.0);
    for (auto& c : s.v) c = rng.uniform(-1.0, 1.0);
    Deriv d = eval_rhs(s, sys);

    EnsembleState shifted = s;
    for (int i = 0; i < 3; ++i) {
        shifted.pos(i)[0] += 5.5;
        shifted.pos(i)[1] -= 2.25;
    }
    Deriv ds = eval_rhs(shifted, sys);
    for (size_t i = 0; i < d.dv.size(); ++i)
        CHECK(ds.dv[i] == doctest::Approx(d.dv[i]).epsilon(1e-12));

    EnsembleState boosted = s;
    for (int i = 0; i < 3; ++i) {
        boosted.vel(i)[0] += 0.75;
        boosted.vel(i)[1] += -1.5;
    }
    Deriv db = eval_rhs(boosted, sys);
    for (size_t i = 0; i < d.dv.size(); ++i)
        CHECK(db.dv[i] == doctest::Approx(d.dv[i]).epsilon(1e-12));
    for (int i = 0; i < 3; ++i) {
        CHECK(db.dx[static_cast<size_t>(i) * 2] ==
              doctest::Approx(d.dx[static_cast<size_t>(i) * 2] + 0.75));
        CHECK(db.dx[static_cast<size_t>(i) * 2 + 1] ==
              doctest::Approx(d.dx[static_cast<size_t>(i) * 2 + 1] - 1.5));
    }
}

TEST_CASE("system invariants are enforced") {
    SystemSpec sys;
    sys.N = 1;
    CHECK_THROWS_AS(sys.validate(), InvalidState);

    SystemSpec torus_force = torus_sys(2, 1, KernelSpec::zero());
    torus_force.force = ForceMode::Confinement;
    torus_force.potential = PotentialSpec::quadratic_confinement();
    CHECK_THROWS_AS(torus_force.validate(), InvalidState);

    SystemSpec bad_mass;
    bad_mass.domain = Domain::open(1);
    bad_mass.N = 2;
    bad_mass.n = 1;
    bad_mass.masses = {1.0};
    CHECK_THROWS_AS(bad_mass.validate(), InvalidState);
}
