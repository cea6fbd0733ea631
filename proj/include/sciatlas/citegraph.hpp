#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "sciatlas/corpus.hpp"

namespace sciatlas {

struct Edge {
  std::uint32_t u = 0;  // u < v
  std::uint32_t v = 0;
  double weight = 0.0;

  bool operator==(const Edge&) const = default;
};

/// Undirected simple graph with node weights. Node ids are dense indices;
/// for publication graphs they coincide with corpus indices, for meta-graphs
/// with cluster ids.
class WeightedGraph {
 public:
  WeightedGraph() = default;

  /// Edges are canonicalized (u < v), sorted, and must be free of
  /// self-loops, duplicates and negative or non-finite weights.
  WeightedGraph(std::vector<double> node_weights, std::vector<Edge> edges);

  static WeightedGraph unit(std::size_t n, std::vector<Edge> edges) {
    return WeightedGraph(std::vector<double>(n, 1.0), std::move(edges));
  }

  std::size_t node_count() const { return node_weights_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<double>& node_weights() const { return node_weights_; }
  double node_weight(std::uint32_t i) const { return node_weights_[i]; }
  double total_node_weight() const;
  const std::vector<Edge>& edges() const { return edges_; }

  struct Neighbor {
    std::uint32_t node;
    double weight;
  };
  /// Neighbors of i in ascending node order.
  std::span<const Neighbor> neighbors(std::uint32_t i) const {
    return {adj_.data() + offsets_[i], adj_.data() + offsets_[i + 1]};
  }
  std::size_t degree(std::uint32_t i) const { return offsets_[i + 1] - offsets_[i]; }

  bool operator==(const WeightedGraph& o) const {
    return node_weights_ == o.node_weights_ && edges_ == o.edges_;
  }

 private:
  std::vector<double> node_weights_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> offsets_{0};
  std::vector<Neighbor> adj_;
};

/// Cluster id per node; ids are dense in [0, cluster_count).
struct Partition {
  std::vector<std::uint32_t> assignment;

  std::size_t node_count() const { return assignment.size(); }
  std::uint32_t cluster_count() const;
  std::vector<std::vector<std::uint32_t>> members() const;

  static Partition singletons(std::size_t n);

  bool operator==(const Partition&) const = default;
};

/// Direct-citation network with w_ij = (1/k_i + 1/k_j) / 2, where k_i is the
/// number of distinct publications i cites or is cited by. Publications
/// without relations stay as isolated nodes.
WeightedGraph build_normalized_graph(const Corpus& corpus);

/// Cluster-level network. Meta-node weight is the summed member weight;
/// meta-edge weight is the summed cross weight divided by |Ca|*|Cb| (member
/// weights), i.e. the average relatedness over all node pairs.
WeightedGraph aggregate_graph(const WeightedGraph& graph, const Partition& partition);

/// Total edge weight between every pair of clusters (no averaging), plus the
/// summed member weights. Shared by aggregation and the merge passes.
WeightedGraph sum_between_clusters(const WeightedGraph& graph, const Partition& partition);

void write_graph(const std::filesystem::path& path, const WeightedGraph& graph);
WeightedGraph read_graph(const std::filesystem::path& path);

}  // namespace sciatlas
