#pragma once

#include <cstdint>
#include <vector>

namespace botdgt {

using NodeId = std::int64_t;

enum class Direction : std::uint8_t { Out = 0, In = 1 };

struct InteractionRecord {
  NodeId source = 0;
  NodeId target = 0;
  std::int64_t timestamp = 0;  // epoch seconds
  int relation = 0;
};

struct SnapshotConfig {
  std::int64_t interval_seconds = 0;  // snapshot interval (> 0)
  std::int64_t origin = 0;            // epoch seconds of the first boundary's window start
  int num_snapshots = 0;              // 0 = derive from the data
  bool cumulative = true;
  bool allow_self_loops = false;

  static constexpr std::int64_t kSecondsPerDay = 86400;
  static SnapshotConfig days(double interval_days, std::int64_t origin = 0,
                             int num_snapshots = 0, bool cumulative = true);
};

// One directed, relation-tagged edge endpoint entry. Sorted by
// (neighbor, direction, relation) and duplicate-free per node.
struct AdjEntry {
  NodeId neighbor;
  Direction direction;
  int relation;

  friend bool operator==(const AdjEntry&, const AdjEntry&) = default;
  friend auto operator<=>(const AdjEntry&, const AdjEntry&) = default;
};

struct Snapshot {
  int index = 0;                            // 0-based position k
  std::int64_t boundary = 0;                // t_k, epoch seconds
  std::vector<std::vector<AdjEntry>> adj;   // one list per node id
  std::vector<bool> node_active;            // true iff node touches an edge

  std::int64_t num_nodes() const { return static_cast<std::int64_t>(adj.size()); }
  std::int64_t num_edges() const;           // directed (u,v,relation) triples
  std::int64_t num_active_nodes() const;
};

struct DynamicGraph {
  std::vector<Snapshot> snapshots;
  std::int64_t num_nodes = 0;

  int num_snapshots() const { return static_cast<int>(snapshots.size()); }
};

struct IngestReport {
  std::int64_t records_total = 0;
  std::int64_t records_clamped = 0;   // timestamp before origin, folded into snapshot 0
  std::int64_t records_dropped = 0;   // timestamp beyond the last boundary
  std::vector<std::int64_t> snapshot_edges;
  std::vector<std::int64_t> snapshot_active_nodes;
};

struct BuildResult {
  DynamicGraph graph;
  IngestReport report;
};

// Per-(node, snapshot) metric table, row-major with stride num_nodes:
// index(k, i) = k * num_nodes + i.
struct SnapshotMetrics {
  std::int64_t num_nodes = 0;
  int num_snapshots = 0;
  std::vector<double> lcc;
  std::vector<double> blr;
  std::vector<std::int64_t> degree_total;        // k_v = indegree + outdegree
  std::vector<std::int64_t> num_followings;      // N_fing
  std::vector<std::int64_t> num_bidirectional;   // N_blinks
  std::vector<std::int64_t> neighbor_edge_count; // |e_v|

  std::size_t at(int snapshot, NodeId node) const {
    return static_cast<std::size_t>(snapshot) * num_nodes + node;
  }
};

// Slices timestamped interaction records into snapshots. Records earlier than
// config.origin are clamped into the first snapshot; records past the last
// boundary are dropped and counted in the report. num_nodes_hint extends the
// node universe past the largest id seen in the records.
BuildResult build_snapshots(const std::vector<InteractionRecord>& records,
                            const SnapshotConfig& config,
                            std::int64_t num_nodes_hint = 0);

// Direction-collapsed neighbor set of `node`, self excluded, ascending ids.
std::vector<NodeId> neighborhood(const Snapshot& snapshot, NodeId node);

// 2*|e_v| / (k_v * (k_v - 1)) with k_v = indegree + outdegree counted over
// distinct (neighbor, direction) pairs, and |e_v| the number of connected
// unordered pairs among the direction-collapsed neighbors. 0 when k_v < 2.
double local_clustering_coefficient(const Snapshot& snapshot, NodeId node);

// N_blinks / N_fing over edges of the given follow relation; 0 when the node
// follows nobody.
double bidirectional_links_ratio(const Snapshot& snapshot, NodeId node,
                                 int follow_relation = 0);

SnapshotMetrics compute_metrics(const DynamicGraph& graph, int follow_relation = 0);

}  // namespace botdgt
