#pragma once
#include <optional>
#include <utility>
#include <vector>

#include "cslab/dynamics.hpp"

namespace cslab {

/// Rigid cluster on the torus: members share one velocity and keep fixed
/// offsets from the (wrapped) anchor point.
struct Cluster {
    std::vector<int> members; // sorted agent ids
    double mass = 1.0;
    Vec anchor;
    std::vector<Vec> offsets; // one per member, constant after gluing
    Vec velocity;
};

struct ClusterSet {
    std::vector<Cluster> clusters;
    double t = 0.0;
    double r0 = 0.5; // gluing radius
    Domain domain = Domain::torus(1);

    int total_agents() const;
    /// Wrapped absolute position of member mi of cluster ci at time t.
    Vec member_position(int ci, int mi) const;
};

struct StickyParams {
    double t_max = 1e4;
    double tau_event = 1e-9; // coalescing window for simultaneous collisions
    double tau_geom = 1e-9;  // slack on the r0 separation precondition
};

struct StickyEvent {
    double time = 0.0;
    std::vector<int> cluster_indices;              // >= 2, ascending
    std::vector<std::pair<int, int>> witness_pairs; // agent-id pairs that reached r0
};

/// One singleton cluster per agent; masses from the system spec.
ClusterSet make_singleton_clusters(const EnsembleState& s, const SystemSpec& sys, double r0);

/// Pre-glued groups (a partition of the agents). Group velocity is the
/// mass-weighted mean of the member velocities.
ClusterSet make_clusters(const EnsembleState& s, const SystemSpec& sys, double r0,
                         const std::vector<std::vector<int>>& groups);

/// Exact free flight of every cluster to time t >= c.t.
ClusterSet advance_clusters(const ClusterSet& c, double t);

/// Earliest time in (c.t, t_max] at which an inter-cluster member pair reaches
/// minimal-image distance r0. Piecewise-linear flight makes this an exact
/// quadratic root per periodic image; the search walks windows short enough
/// that only nearby images matter. Roots within tau_event of the earliest one
/// merge into a single multi-cluster event (its connected component).
/// Throws InvalidState if clusters already overlap beyond tau_geom.
std::optional<StickyEvent> next_event(const ClusterSet& c, double t_max,
                                      const StickyParams& params = {});

/// Replace the colliding clusters by one rigid cluster: velocity is the
/// mass-weighted average, members keep their absolute positions at the event
/// time. Momentum and mass are conserved exactly.
ClusterSet merge_clusters(const ClusterSet& c, const StickyEvent& e);

struct StickyLogEntry {
    double time = 0.0;
    std::vector<std::vector<int>> merged_groups;
    std::vector<Vec> velocities_before;
    std::vector<double> masses_before;
    Vec velocity_after;
    std::vector<std::pair<int, int>> witness_pairs;
};

struct StickyRecord {
    ClusterSet initial;
    std::vector<StickyLogEntry> events; // sorted by time
    ClusterSet final_clusters;          // advanced to t_max (or earlier stop)
    bool reached_single_cluster = false;
};

StickyRecord run_sticky(const EnsembleState& s, const SystemSpec& sys, double r0,
                        const StickyParams& params = {});
StickyRecord run_sticky_clusters(const ClusterSet& initial, const StickyParams& params = {});

/// Re-applies a recorded event log to the initial cluster set. Performs the
/// same flight and merge arithmetic as the original run, so the result is
/// bit-exact against it.
ClusterSet replay_events(const ClusterSet& initial, const std::vector<StickyLogEntry>& events,
                         double t_end);

} // namespace cslab
