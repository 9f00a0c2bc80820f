#include "cslab/integrator.hpp"

#include <cmath>

namespace cslab {
namespace {

struct Rk4Workspace {
    Deriv k1, k2, k3, k4;
    EnsembleState stage;
};

void stage_state(const EnsembleState& base, const Deriv& d, double a, EnsembleState& out) {
    out.t = base.t + a;
    out.N = base.N;
    out.n = base.n;
    out.x.resize(base.x.size());
    out.v.resize(base.v.size());
    for (size_t i = 0; i < base.x.size(); ++i) out.x[i] = base.x[i] + a * d.dx[i];
    for (size_t i = 0; i < base.v.size(); ++i) out.v[i] = base.v[i] + a * d.dv[i];
    out.acc_phi = base.acc_phi + a * d.dphi;
    out.acc_diss = base.acc_diss + a * d.ddiss;
    out.acc_i1 = base.acc_i1 + a * d.di1;
}

void advance_rk4(EnsembleState& s, const SystemSpec& sys, double h, bool wrap,
                 Rk4Workspace& ws) {
    eval_rhs(s, sys, ws.k1);
    stage_state(s, ws.k1, 0.5 * h, ws.stage);
    eval_rhs(ws.stage, sys, ws.k2);
    stage_state(s, ws.k2, 0.5 * h, ws.stage);
    eval_rhs(ws.stage, sys, ws.k3);
    stage_state(s, ws.k3, h, ws.stage);
    eval_rhs(ws.stage, sys, ws.k4);

    const double w = h / 6.0;
    for (size_t i = 0; i < s.x.size(); ++i)
        s.x[i] += w * (ws.k1.dx[i] + 2.0 * ws.k2.dx[i] + 2.0 * ws.k3.dx[i] + ws.k4.dx[i]);
    for (size_t i = 0; i < s.v.size(); ++i)
        s.v[i] += w * (ws.k1.dv[i] + 2.0 * ws.k2.dv[i] + 2.0 * ws.k3.dv[i] + ws.k4.dv[i]);
    s.acc_phi += w * (ws.k1.dphi + 2.0 * ws.k2.dphi + 2.0 * ws.k3.dphi + ws.k4.dphi);
    s.acc_diss += w * (ws.k1.ddiss + 2.0 * ws.k2.ddiss + 2.0 * ws.k3.ddiss + ws.k4.ddiss);
    s.acc_i1 += w * (ws.k1.di1 + 2.0 * ws.k2.di1 + 2.0 * ws.k3.di1 + ws.k4.di1);
    s.t += h;

    if (wrap && sys.domain.is_torus())
        for (size_t i = 0; i < s.x.size(); ++i) s.x[i] = wrap_coord(s.x[i], sys.domain.period);

    if (!s.finite()) throw NumericalBlowup("rk4 step produced non-finite state", s.t);
}

} // namespace

EnsembleState step_rk4(const EnsembleState& s, const SystemSpec& sys, double h) {
    if (!(h > 0.0)) throw InvalidState("step_rk4: h must be > 0");
    sys.check_state(s);
    Rk4Workspace ws;
    EnsembleState out = s;
    advance_rk4(out, sys, h, /*wrap=*/sys.domain.is_torus(), ws);
    return out;
}

struct Rk4Stepper::Impl {
    Rk4Workspace ws;
};

Rk4Stepper::Rk4Stepper(const SystemSpec& sys) : sys_(sys), impl_(std::make_shared<Impl>()) {
    sys.validate();
}

void Rk4Stepper::step(EnsembleState& s, double h, bool wrap) {
    if (!(h > 0.0)) throw InvalidState("Rk4Stepper: h must be > 0");
    advance_rk4(s, sys_, h, wrap && sys_.domain.is_torus(), impl_->ws);
}

TrajectoryRecord integrate(const EnsembleState& s0, const SystemSpec& sys,
                           const IntegrationParams& params) {
    if (!(params.h > 0.0)) throw InvalidState("integrate: h must be > 0");
    if (!(params.T >= 0.0)) throw InvalidState("integrate: T must be >= 0");
    if (params.sample_every < 1) throw InvalidState("integrate: sample_every must be >= 1");
    sys.validate();
    sys.check_state(s0);
    if (!s0.finite()) throw InvalidState("integrate: initial state not finite");

    TrajectoryRecord rec;
    EnsembleState cur = s0;
    if (params.wrap && sys.domain.is_torus())
        for (size_t i = 0; i < cur.x.size(); ++i)
            cur.x[i] = wrap_coord(cur.x[i], sys.domain.period);

    auto record = [&](const EnsembleState& s) {
        rec.times.push_back(s.t);
        rec.states.push_back(s);
        rec.samples.push_back(sample_diagnostics(s, sys, params.pair_eps));
    };
    record(cur);
    rec.min_pair_dist = min_pair_distance(cur, sys);

    long n_full = static_cast<long>(std::floor(params.T / params.h + 1e-9));
    double rem = params.T - static_cast<double>(n_full) * params.h;
    if (rem < 1e-9 * params.h) rem = 0.0;

    Rk4Workspace ws;
    long last_recorded = 0;
    try {
        for (long step = 1; step <= n_full; ++step) {
            advance_rk4(cur, sys, params.h, params.wrap, ws);
            rec.min_pair_dist = std::min(rec.min_pair_dist, min_pair_distance(cur, sys));
            if (step % params.sample_every == 0) {
                record(cur);
                last_recorded = step;
            }
        }
        if (rem > 0.0) {
            advance_rk4(cur, sys, rem, params.wrap, ws);
            rec.min_pair_dist = std::min(rec.min_pair_dist, min_pair_distance(cur, sys));
            record(cur);
        } else if (last_recorded != n_full) {
            record(cur);
        }
    } catch (const NumericalBlowup& b) {
        rec.blew_up = true;
        rec.blowup_time = b.time;
    }
    return rec;
}

namespace {

// Endpoint of the (x, v) flow started at s, integrated without wrapping.
void flow_endpoint(const EnsembleState& s, const SystemSpec& sys, double t, double h,
                   std::vector<double>& out) {
    long steps = std::max(1L, static_cast<long>(std::ceil(t / h - 1e-12)));
    double hh = t / static_cast<double>(steps);
    EnsembleState cur = s;
    Rk4Workspace ws;
    for (long k = 0; k < steps; ++k) advance_rk4(cur, sys, hh, /*wrap=*/false, ws);
    out.resize(cur.x.size() + cur.v.size());
    for (size_t i = 0; i < cur.x.size(); ++i) out[i] = cur.x[i];
    for (size_t i = 0; i < cur.v.size(); ++i) out[cur.x.size() + i] = cur.v[i];
}

double det_inplace(std::vector<std::vector<double>>& m) {
    const size_t dim = m.size();
    double det = 1.0;
    for (size_t c = 0; c < dim; ++c) {
        size_t piv = c;
        for (size_t r = c + 1; r < dim; ++r)
            if (std::fabs(m[r][c]) > std::fabs(m[piv][c])) piv = r;
        if (std::fabs(m[piv][c]) < 1e-300)
            throw NumericalBlowup("flow_jacobian_fd: singular difference matrix", 0.0);
        if (piv != c) {
            std::swap(m[piv], m[c]);
            det = -det;
        }
        det *= m[c][c];
        for (size_t r = c + 1; r < dim; ++r) {
            double f = m[r][c] / m[c][c];
            for (size_t cc = c; cc < dim; ++cc) m[r][cc] -= f * m[c][cc];
        }
    }
    return det;
}

} // namespace

double flow_jacobian_fd(const EnsembleState& s0, const SystemSpec& sys, double t, double delta,
                        double h) {
    sys.validate();
    sys.check_state(s0);
    const size_t m = 2 * static_cast<size_t>(s0.N) * static_cast<size_t>(s0.n);
    if (m > 16) throw InvalidState("flow_jacobian_fd: requires 2nN <= 16");
    if (!(delta >= 1e-7 && delta <= 1e-4))
        throw InvalidState("flow_jacobian_fd: delta must be in [1e-7, 1e-4]");
    if (!(t > 0.0)) throw InvalidState("flow_jacobian_fd: t must be > 0");

    const size_t half = m / 2;
    std::vector<std::vector<double>> jac(m, std::vector<double>(m, 0.0));
    std::vector<double> plus, minus;
    for (size_t c = 0; c < m; ++c) {
        EnsembleState sp = s0, sm = s0;
        if (c < half) {
            sp.x[c] += delta;
            sm.x[c] -= delta;
        } else {
            sp.v[c - half] += delta;
            sm.v[c - half] -= delta;
        }
        flow_endpoint(sp, sys, t, h, plus);
        flow_endpoint(sm, sys, t, h, minus);
        for (size_t r = 0; r < m; ++r) jac[r][c] = (plus[r] - minus[r]) / (2.0 * delta);
    }
    return det_inplace(jac);
}

} // namespace cslab
