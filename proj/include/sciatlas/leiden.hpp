#pragma once

#include <cstdint>
#include <optional>

#include "sciatlas/citegraph.hpp"

namespace sciatlas {

/// Constant Potts Model quality:
///   H = sum over clusters [ e_c - resolution * n_c (n_c - 1) / 2 ]
/// with e_c the internal edge weight and n_c the summed node weight.
double cpm_quality(const WeightedGraph& graph, const Partition& partition, double resolution);

struct LeidenOptions {
  double resolution = 1e-4;
  std::uint64_t seed = 0;
  int max_iterations = 100;
  /// Temperature of the randomized merge choice in the refinement phase.
  double randomness = 0.01;
};

/// Leiden community detection under CPM. Each iteration runs fast local
/// moving, refinement and aggregation until the aggregate network is stable.
/// Iterations repeat from the previous result until one yields no quality
/// gain or max_iterations is reached. Clusters of the result are connected
/// and numbered by decreasing size (ties by lowest member index).
Partition leiden(const WeightedGraph& graph, const LeidenOptions& options);

inline Partition leiden(const WeightedGraph& graph, double resolution, std::uint64_t seed,
                        int max_iterations = 100) {
  return leiden(graph, LeidenOptions{resolution, seed, max_iterations});
}

struct Reassignment {
  Partition partition;
  /// Cluster holding nodes that could not be attached anywhere. It is the
  /// only cluster allowed below the minimum size.
  std::optional<std::uint32_t> unassigned;
};

/// Node-level small-cluster handling. Members of clusters whose summed node
/// weight is below min_size move one by one to the qualifying cluster they
/// are most strongly linked to; passes repeat until nothing moves.
Reassignment reassign_small_clusters(const WeightedGraph& graph, const Partition& partition,
                                     double min_size);

/// Cluster-level small-cluster handling. meta_graph has one node per cluster
/// of `partition` (weights = publication counts, edges = average
/// relatedness). Repeatedly merges the smallest undersized cluster into the
/// qualifying cluster with the strongest relation. Returns a partition over
/// the same nodes as `partition`.
Partition merge_small_clusters(const WeightedGraph& meta_graph, const Partition& partition,
                               double min_size);

/// Renumbers clusters by decreasing summed node weight, ties by lowest
/// member index. Empty cluster ids are dropped.
Partition canonical_order(const WeightedGraph& graph, const Partition& partition);

}  // namespace sciatlas
