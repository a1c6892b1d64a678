#include "botdgt/dyngraph.hpp"

#include <algorithm>
#include <cmath>

#include "botdgt/errors.hpp"

namespace botdgt {

SnapshotConfig SnapshotConfig::days(double interval_days, std::int64_t origin,
                                    int num_snapshots, bool cumulative) {
  SnapshotConfig c;
  c.interval_seconds = static_cast<std::int64_t>(interval_days * kSecondsPerDay);
  c.origin = origin;
  c.num_snapshots = num_snapshots;
  c.cumulative = cumulative;
  return c;
}

std::int64_t Snapshot::num_edges() const {
  std::int64_t out_entries = 0;
  for (const auto& list : adj)
    for (const auto& e : list)
      if (e.direction == Direction::Out) ++out_entries;
  return out_entries;
}

std::int64_t Snapshot::num_active_nodes() const {
  std::int64_t n = 0;
  for (bool a : node_active) n += a ? 1 : 0;
  return n;
}

namespace {

int derive_num_snapshots(const std::vector<InteractionRecord>& records,
                         const SnapshotConfig& config) {
  std::int64_t max_ts = config.origin;
  for (const auto& r : records) max_ts = std::max(max_ts, r.timestamp);
  std::int64_t span = max_ts - config.origin;
  std::int64_t n;
  if (config.cumulative) {
    // need max_ts <= origin + n * interval
    n = (span + config.interval_seconds - 1) / config.interval_seconds;
  } else {
    // need max_ts < origin + n * interval
    n = span / config.interval_seconds + 1;
  }
  return static_cast<int>(std::max<std::int64_t>(n, 1));
}

}  // namespace

BuildResult build_snapshots(const std::vector<InteractionRecord>& records,
                            const SnapshotConfig& config,
                            std::int64_t num_nodes_hint) {
  if (records.empty()) throw ValidationError("no interactions");
  if (config.interval_seconds <= 0) throw ValidationError("snapshot interval must be > 0");
  if (config.num_snapshots < 0) throw ValidationError("num_snapshots must be >= 1");

  const int n_snaps = config.num_snapshots > 0 ? config.num_snapshots
                                               : derive_num_snapshots(records, config);

  std::int64_t num_nodes = num_nodes_hint;
  for (const auto& r : records) {
    if (r.source < 0 || r.target < 0) throw ValidationError("negative node id");
    if (r.timestamp < 0) throw ValidationError("negative timestamp");
    if (r.source == r.target && !config.allow_self_loops)
      throw ValidationError("self-loop interaction rejected (node " +
                            std::to_string(r.source) + ")");
    num_nodes = std::max({num_nodes, r.source + 1, r.target + 1});
  }

  BuildResult result;
  result.report.records_total = static_cast<std::int64_t>(records.size());

  // Effective timestamp after clamping pre-origin records into the first window.
  std::vector<std::pair<std::int64_t, const InteractionRecord*>> stamped;
  stamped.reserve(records.size());
  const std::int64_t last_boundary = config.origin +
      static_cast<std::int64_t>(n_snaps) * config.interval_seconds;
  for (const auto& r : records) {
    std::int64_t ts = r.timestamp;
    if (ts < config.origin) {
      ts = config.origin;
      ++result.report.records_clamped;
    }
    const bool beyond = config.cumulative ? ts > last_boundary : ts >= last_boundary;
    if (beyond) {
      ++result.report.records_dropped;
      continue;
    }
    stamped.emplace_back(ts, &r);
  }
  if (stamped.empty()) throw ValidationError("no interactions fall inside the snapshot range");

  result.graph.num_nodes = num_nodes;
  result.graph.snapshots.resize(n_snaps);
  for (int k = 0; k < n_snaps; ++k) {
    Snapshot& snap = result.graph.snapshots[k];
    snap.index = k;
    snap.boundary = config.origin + static_cast<std::int64_t>(k + 1) * config.interval_seconds;
    snap.adj.assign(num_nodes, {});
    snap.node_active.assign(num_nodes, false);

    const std::int64_t window_start = config.origin +
        static_cast<std::int64_t>(k) * config.interval_seconds;
    for (const auto& [ts, rec] : stamped) {
      const bool inside = config.cumulative ? ts <= snap.boundary
                                            : (ts >= window_start && ts < snap.boundary);
      if (!inside) continue;
      snap.adj[rec->source].push_back({rec->target, Direction::Out, rec->relation});
      snap.adj[rec->target].push_back({rec->source, Direction::In, rec->relation});
    }
    for (std::int64_t i = 0; i < num_nodes; ++i) {
      auto& list = snap.adj[i];
      std::sort(list.begin(), list.end());
      list.erase(std::unique(list.begin(), list.end()), list.end());
      snap.node_active[i] = !list.empty();
    }

    result.report.snapshot_edges.push_back(snap.num_edges());
    result.report.snapshot_active_nodes.push_back(snap.num_active_nodes());
  }
  return result;
}

std::vector<NodeId> neighborhood(const Snapshot& snapshot, NodeId node) {
  std::vector<NodeId> out;
  out.reserve(snapshot.adj[node].size());
  for (const auto& e : snapshot.adj[node])
    if (e.neighbor != node) out.push_back(e.neighbor);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

// Distinct (neighbor, direction) pairs; a mutually-following pair contributes 2.
std::int64_t degree_total_of(const Snapshot& snapshot, NodeId node) {
  std::int64_t deg = 0;
  const auto& list = snapshot.adj[node];
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (i > 0 && list[i].neighbor == list[i - 1].neighbor &&
        list[i].direction == list[i - 1].direction)
      continue;  // multi-relation parallel edge
    ++deg;
  }
  return deg;
}

bool connected_any_direction(const Snapshot& snapshot, NodeId a, NodeId b) {
  // adj lists are sorted by neighbor first, so binary search on the id.
  const auto& list = snapshot.adj[a];
  auto it = std::lower_bound(list.begin(), list.end(), b,
                             [](const AdjEntry& e, NodeId id) { return e.neighbor < id; });
  return it != list.end() && it->neighbor == b;
}

}  // namespace

double local_clustering_coefficient(const Snapshot& snapshot, NodeId node) {
  const std::int64_t k_v = degree_total_of(snapshot, node);
  if (k_v < 2) return 0.0;
  const std::vector<NodeId> nbrs = neighborhood(snapshot, node);
  std::int64_t edges = 0;
  for (std::size_t a = 0; a < nbrs.size(); ++a)
    for (std::size_t b = a + 1; b < nbrs.size(); ++b)
      if (connected_any_direction(snapshot, nbrs[a], nbrs[b])) ++edges;
  return 2.0 * static_cast<double>(edges) /
         (static_cast<double>(k_v) * static_cast<double>(k_v - 1));
}

double bidirectional_links_ratio(const Snapshot& snapshot, NodeId node,
                                 int follow_relation) {
  std::int64_t fing = 0;
  std::int64_t blinks = 0;
  const auto& list = snapshot.adj[node];
  NodeId last_target = -1;
  for (const auto& e : list) {
    if (e.direction != Direction::Out || e.relation != follow_relation) continue;
    if (e.neighbor == last_target) continue;  // dedup (cannot occur; lists are unique)
    last_target = e.neighbor;
    ++fing;
    // does the target follow back?
    const AdjEntry back{e.neighbor, Direction::In, follow_relation};
    if (std::binary_search(list.begin(), list.end(), back)) ++blinks;
  }
  if (fing == 0) return 0.0;
  return static_cast<double>(blinks) / static_cast<double>(fing);
}

SnapshotMetrics compute_metrics(const DynamicGraph& graph, int follow_relation) {
  SnapshotMetrics m;
  m.num_nodes = graph.num_nodes;
  m.num_snapshots = graph.num_snapshots();
  const std::size_t total = static_cast<std::size_t>(m.num_nodes) * m.num_snapshots;
  m.lcc.assign(total, 0.0);
  m.blr.assign(total, 0.0);
  m.degree_total.assign(total, 0);
  m.num_followings.assign(total, 0);
  m.num_bidirectional.assign(total, 0);
  m.neighbor_edge_count.assign(total, 0);

  for (int k = 0; k < m.num_snapshots; ++k) {
    const Snapshot& snap = graph.snapshots[k];
    for (NodeId i = 0; i < m.num_nodes; ++i) {
      if (!snap.node_active[i]) continue;
      const std::size_t idx = m.at(k, i);
      m.degree_total[idx] = degree_total_of(snap, i);
      m.lcc[idx] = local_clustering_coefficient(snap, i);

      std::int64_t fing = 0, blinks = 0;
      NodeId last_target = -1;
      for (const auto& e : snap.adj[i]) {
        if (e.direction != Direction::Out || e.relation != follow_relation) continue;
        if (e.neighbor == last_target) continue;
        last_target = e.neighbor;
        ++fing;
        const AdjEntry back{e.neighbor, Direction::In, follow_relation};
        if (std::binary_search(snap.adj[i].begin(), snap.adj[i].end(), back)) ++blinks;
      }
      m.num_followings[idx] = fing;
      m.num_bidirectional[idx] = blinks;
      m.blr[idx] = fing > 0 ? static_cast<double>(blinks) / static_cast<double>(fing) : 0.0;

      const std::vector<NodeId> nbrs = neighborhood(snap, i);
      std::int64_t edges = 0;
      for (std::size_t a = 0; a < nbrs.size(); ++a)
        for (std::size_t b = a + 1; b < nbrs.size(); ++b)
          if (connected_any_direction(snap, nbrs[a], nbrs[b])) ++edges;
      m.neighbor_edge_count[idx] = edges;
    }
  }
  return m;
}

}  // namespace botdgt
