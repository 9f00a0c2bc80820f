#include "cslab/sticky.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace cslab {

int ClusterSet::total_agents() const {
    int n = 0;
    for (const auto& c : clusters) n += static_cast<int>(c.members.size());
    return n;
}

Vec ClusterSet::member_position(int ci, int mi) const {
    const Cluster& c = clusters[static_cast<size_t>(ci)];
    Vec p(c.anchor.size());
    for (size_t k = 0; k < p.size(); ++k)
        p[k] = wrap_coord(c.anchor[k] + c.offsets[static_cast<size_t>(mi)][k], domain.period);
    return p;
}

namespace {

Cluster build_cluster(const EnsembleState& s, const SystemSpec& sys, const Domain& dom,
                      const std::vector<int>& group) {
    Cluster c;
    c.members = group;
    std::sort(c.members.begin(), c.members.end());
    const int n = s.n;
    c.anchor.assign(static_cast<size_t>(n), 0.0);
    for (int k = 0; k < n; ++k)
        c.anchor[static_cast<size_t>(k)] = wrap_coord(s.pos(c.members[0])[k], dom.period);
    c.mass = 0.0;
    c.velocity.assign(static_cast<size_t>(n), 0.0);
    for (int a : c.members) {
        double m = sys.mass(a);
        c.mass += m;
        for (int k = 0; k < n; ++k) c.velocity[static_cast<size_t>(k)] += m * s.vel(a)[k];
    }
    for (int k = 0; k < n; ++k) c.velocity[static_cast<size_t>(k)] /= c.mass;
    c.offsets.reserve(c.members.size());
    for (int a : c.members) {
        Vec off(static_cast<size_t>(n));
        for (int k = 0; k < n; ++k)
            off[static_cast<size_t>(k)] =
                min_image_coord(s.pos(a)[k] - c.anchor[static_cast<size_t>(k)], dom.period);
        c.offsets.push_back(std::move(off));
    }
    return c;
}

} // namespace

ClusterSet make_singleton_clusters(const EnsembleState& s, const SystemSpec& sys, double r0) {
    std::vector<std::vector<int>> groups;
    groups.reserve(static_cast<size_t>(s.N));
    for (int i = 0; i < s.N; ++i) groups.push_back({i});
    return make_clusters(s, sys, r0, groups);
}

ClusterSet make_clusters(const EnsembleState& s, const SystemSpec& sys, double r0,
                         const std::vector<std::vector<int>>& groups) {
    sys.validate();
    sys.check_state(s);
    if (!sys.domain.is_torus()) throw InvalidState("sticky model: torus domain required");
    if (!(r0 > 0.0 && r0 < 0.5 * sys.domain.period))
        throw InvalidState("sticky model: requires 0 < r0 < period/2");

    std::vector<char> seen(static_cast<size_t>(s.N), 0);
    for (const auto& g : groups)
        for (int a : g) {
            if (a < 0 || a >= s.N || seen[static_cast<size_t>(a)])
                throw InvalidState("make_clusters: groups must partition the agents");
            seen[static_cast<size_t>(a)] = 1;
        }
    for (char c : seen)
        if (!c) throw InvalidState("make_clusters: groups must partition the agents");

    ClusterSet cs;
    cs.t = s.t;
    cs.r0 = r0;
    cs.domain = sys.domain;
    for (const auto& g : groups) cs.clusters.push_back(build_cluster(s, sys, cs.domain, g));
    return cs;
}

ClusterSet advance_clusters(const ClusterSet& c, double t) {
    if (t < c.t) throw InvalidState("advance_clusters: cannot move backwards in time");
    ClusterSet out = c;
    double dt = t - c.t;
    for (auto& cl : out.clusters)
        for (size_t k = 0; k < cl.anchor.size(); ++k)
            cl.anchor[k] = wrap_coord(cl.anchor[k] + dt * cl.velocity[k], c.domain.period);
    out.t = t;
    return out;
}

namespace {

struct Root {
    double time;
    int ci, cj; // cluster indices
    int a, b;   // agent ids
};

// Checks the inter-cluster separation precondition at the current time.
void check_separation(const ClusterSet& c, double tau_geom) {
    const size_t K = c.clusters.size();
    for (size_t i = 0; i < K; ++i)
        for (size_t j = i + 1; j < K; ++j)
            for (size_t a = 0; a < c.clusters[i].members.size(); ++a)
                for (size_t b = 0; b < c.clusters[j].members.size(); ++b) {
                    Vec pa = c.member_position(static_cast<int>(i), static_cast<int>(a));
                    Vec pb = c.member_position(static_cast<int>(j), static_cast<int>(b));
                    if (distance(pa, pb, c.domain) < c.r0 - tau_geom)
                        throw InvalidState("sticky: clusters closer than r0 - tau_geom");
                }
}

} // namespace

std::optional<StickyEvent> next_event(const ClusterSet& c, double t_max,
                                      const StickyParams& params) {
    if (c.clusters.size() < 2) return std::nullopt;
    check_separation(c, params.tau_geom);
    if (t_max <= c.t) return std::nullopt;

    const int n = c.domain.dim;
    const double period = c.domain.period;
    const size_t K = c.clusters.size();

    double vmax = 0.0;
    for (size_t i = 0; i < K; ++i)
        for (size_t j = i + 1; j < K; ++j) {
            double dv2 = 0.0;
            for (int k = 0; k < n; ++k) {
                double d = c.clusters[i].velocity[static_cast<size_t>(k)] -
                           c.clusters[j].velocity[static_cast<size_t>(k)];
                dv2 += d * d;
            }
            vmax = std::max(vmax, std::sqrt(dv2));
        }
    if (vmax == 0.0) return std::nullopt; // all relative positions frozen

    const double window = period / vmax;
    const double sigma_slack = 1e-9; // roots marginally behind the window start

    double wstart = c.t;
    while (wstart < t_max) {
        const double wlen = std::min(window, t_max - wstart);
        if (!(wlen > 0.0) || wstart + wlen == wstart) break; // window underflow at t_max
        std::vector<Root> roots;

        for (size_t i = 0; i < K; ++i) {
            const Cluster& A = c.clusters[i];
            for (size_t j = i + 1; j < K; ++j) {
                const Cluster& B = c.clusters[j];
                double dv[64];
                double dv2 = 0.0;
                for (int k = 0; k < n; ++k) {
                    dv[k] = A.velocity[static_cast<size_t>(k)] - B.velocity[static_cast<size_t>(k)];
                    dv2 += dv[k] * dv[k];
                }
                if (dv2 == 0.0) continue;

                for (size_t ma = 0; ma < A.members.size(); ++ma) {
                    for (size_t mb = 0; mb < B.members.size(); ++mb) {
                        // relative position at the window start, reduced per coordinate
                        double dx0[64];
                        for (int k = 0; k < n; ++k) {
                            double pa = A.anchor[static_cast<size_t>(k)] + A.offsets[ma][static_cast<size_t>(k)] +
                                        A.velocity[static_cast<size_t>(k)] * (wstart - c.t);
                            double pb = B.anchor[static_cast<size_t>(k)] + B.offsets[mb][static_cast<size_t>(k)] +
                                        B.velocity[static_cast<size_t>(k)] * (wstart - c.t);
                            dx0[k] = min_image_coord(pa - pb, period);
                        }
                        int mbound[64];
                        for (int k = 0; k < n; ++k)
                            mbound[k] = static_cast<int>(
                                std::floor((std::fabs(dx0[k]) + std::fabs(dv[k]) * wlen + c.r0) /
                                           period)) + 1;

                        // enumerate image shifts coordinate-wise
                        int m[64];
                        for (int k = 0; k < n; ++k) m[k] = -mbound[k];
                        while (true) {
                            double b1 = 0.0, c2 = -c.r0 * c.r0;
                            for (int k = 0; k < n; ++k) {
                                double d0 = dx0[k] + m[k] * period;
                                b1 += 2.0 * d0 * dv[k];
                                c2 += d0 * d0;
                            }
                            double disc = b1 * b1 - 4.0 * dv2 * c2;
                            if (disc >= 0.0) {
                                double sq = std::sqrt(disc);
                                // first (approaching) root of the upward parabola,
                                // via the cancellation-free pairing
                                double s_minus;
                                if (b1 > 0.0) {
                                    s_minus = (-b1 - sq) / (2.0 * dv2);
                                } else {
                                    double denom = sq - b1;
                                    s_minus = denom > 0.0 ? 2.0 * c2 / denom : 0.0;
                                }
                                if (s_minus >= -sigma_slack && s_minus <= wlen) {
                                    double tev = std::max(wstart + s_minus, c.t);
                                    roots.push_back({tev, static_cast<int>(i), static_cast<int>(j),
                                                     A.members[ma], B.members[mb]});
                                }
                            }
                            int pos = 0;
                            while (pos < n && m[pos] == mbound[pos]) m[pos++] = -mbound[pos];
                            if (pos == n) break;
                            ++m[pos];
                        }
                    }
                }
            }
        }

        if (!roots.empty()) {
            size_t earliest = 0;
            for (size_t r = 1; r < roots.size(); ++r)
                if (roots[r].time < roots[earliest].time) earliest = r;
            double t_star = roots[earliest].time;

            // connected component (within tau_event of t_star) containing the earliest pair
            std::vector<int> parent(K);
            std::iota(parent.begin(), parent.end(), 0);
            auto find = [&](int a) {
                while (parent[static_cast<size_t>(a)] != a) a = parent[static_cast<size_t>(a)];
                return a;
            };
            for (const auto& r : roots) {
                if (r.time > t_star + params.tau_event) continue;
                int ra = find(r.ci), rb = find(r.cj);
                if (ra != rb) parent[static_cast<size_t>(std::max(ra, rb))] = std::min(ra, rb);
            }
            int comp = find(roots[earliest].ci);

            StickyEvent ev;
            ev.time = t_star;
            for (size_t ci = 0; ci < K; ++ci)
                if (find(static_cast<int>(ci)) == comp) ev.cluster_indices.push_back(static_cast<int>(ci));
            for (const auto& r : roots)
                if (r.time <= t_star + params.tau_event && find(r.ci) == comp)
                    ev.witness_pairs.emplace_back(std::min(r.a, r.b), std::max(r.a, r.b));
            std::sort(ev.witness_pairs.begin(), ev.witness_pairs.end());
            ev.witness_pairs.erase(std::unique(ev.witness_pairs.begin(), ev.witness_pairs.end()),
                                   ev.witness_pairs.end());
            if (ev.cluster_indices.size() >= 2) return ev;
            // single-cluster component can only come from stale roots; keep scanning
        }
        wstart += wlen;
    }
    return std::nullopt;
}

ClusterSet merge_clusters(const ClusterSet& c, const StickyEvent& e) {
    if (e.cluster_indices.size() < 2) throw InvalidState("merge: needs at least two clusters");
    ClusterSet out = c;
    const int n = c.domain.dim;

    Cluster merged;
    merged.mass = 0.0;
    merged.velocity.assign(static_cast<size_t>(n), 0.0);
    for (int ci : e.cluster_indices) {
        const Cluster& cl = c.clusters[static_cast<size_t>(ci)];
        merged.mass += cl.mass;
        for (int k = 0; k < n; ++k)
            merged.velocity[static_cast<size_t>(k)] += cl.mass * cl.velocity[static_cast<size_t>(k)];
        merged.members.insert(merged.members.end(), cl.members.begin(), cl.members.end());
    }
    for (int k = 0; k < n; ++k) merged.velocity[static_cast<size_t>(k)] /= merged.mass;

    // absolute member positions at the event time, keyed by agent id
    std::vector<std::pair<int, Vec>> positions;
    for (int ci : e.cluster_indices) {
        const Cluster& cl = c.clusters[static_cast<size_t>(ci)];
        for (size_t mi = 0; mi < cl.members.size(); ++mi)
            positions.emplace_back(cl.members[mi],
                                   c.member_position(ci, static_cast<int>(mi)));
    }
    std::sort(positions.begin(), positions.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::sort(merged.members.begin(), merged.members.end());

    merged.anchor = positions[0].second;
    merged.offsets.reserve(merged.members.size());
    for (const auto& [agent, pos] : positions) {
        (void)agent;
        Vec off(static_cast<size_t>(n));
        for (int k = 0; k < n; ++k)
            off[static_cast<size_t>(k)] =
                min_image_coord(pos[static_cast<size_t>(k)] - merged.anchor[static_cast<size_t>(k)],
                                c.domain.period);
        merged.offsets.push_back(std::move(off));
    }

    out.clusters[static_cast<size_t>(e.cluster_indices[0])] = std::move(merged);
    for (size_t idx = e.cluster_indices.size(); idx-- > 1;)
        out.clusters.erase(out.clusters.begin() + e.cluster_indices[idx]);
    return out;
}

StickyRecord run_sticky(const EnsembleState& s, const SystemSpec& sys, double r0,
                        const StickyParams& params) {
    return run_sticky_clusters(make_singleton_clusters(s, sys, r0), params);
}

StickyRecord run_sticky_clusters(const ClusterSet& initial, const StickyParams& params) {
    StickyRecord rec;
    rec.initial = initial;
    ClusterSet c = initial;
    while (c.clusters.size() > 1) {
        auto ev = next_event(c, params.t_max, params);
        if (!ev) break;
        c = advance_clusters(c, ev->time);

        StickyLogEntry entry;
        entry.time = ev->time;
        for (int ci : ev->cluster_indices) {
            const Cluster& cl = c.clusters[static_cast<size_t>(ci)];
            entry.merged_groups.push_back(cl.members);
            entry.velocities_before.push_back(cl.velocity);
            entry.masses_before.push_back(cl.mass);
        }
        entry.witness_pairs = ev->witness_pairs;

        c = merge_clusters(c, *ev);
        entry.velocity_after = c.clusters[static_cast<size_t>(ev->cluster_indices[0])].velocity;
        rec.events.push_back(std::move(entry));
    }
    rec.reached_single_cluster = c.clusters.size() == 1;
    if (c.t < params.t_max) c = advance_clusters(c, params.t_max);
    rec.final_clusters = std::move(c);
    return rec;
}

ClusterSet replay_events(const ClusterSet& initial, const std::vector<StickyLogEntry>& events,
                         double t_end) {
    ClusterSet c = initial;
    for (const auto& e : events) {
        c = advance_clusters(c, e.time);
        StickyEvent ev;
        ev.time = e.time;
        for (const auto& group : e.merged_groups) {
            int idx = -1;
            for (size_t ci = 0; ci < c.clusters.size(); ++ci)
                if (c.clusters[ci].members == group) {
                    idx = static_cast<int>(ci);
                    break;
                }
            if (idx < 0) throw InvalidState("replay_events: log group not found in cluster set");
            ev.cluster_indices.push_back(idx);
        }
        std::sort(ev.cluster_indices.begin(), ev.cluster_indices.end());
        c = merge_clusters(c, ev);
    }
    if (c.t < t_end) c = advance_clusters(c, t_end);
    return c;
}

} // namespace cslab
