#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "sciatlas/citegraph.hpp"
#include "sciatlas/hierarchy.hpp"

namespace sciatlas {

/// ForceAtlas-style parameters. outbound_attraction and adjust_sizes are
/// carried for configuration parity and have no effect.
struct LayoutParams {
  int iterations = 10000;
  double inertia = 0.1;
  double repulsion_strength = 500;
  double attraction_strength = 10;
  double max_displacement = 10;
  bool freeze_balance = true;
  double freeze_strength = 80;
  double freeze_inertia = 0.2;
  double gravity = 30;
  bool outbound_attraction = false;
  bool adjust_sizes = false;
  double speed = 1;
  double cooling = 1;

  /// Rescale edge weights so the heaviest edge has weight 1 before the run.
  bool normalize_weights = true;
  /// Node count above which repulsion uses a Barnes-Hut quadtree.
  std::size_t barnes_hut_threshold = 2000;
  double barnes_hut_theta = 1.0;
  double initial_extent = 100;
  int threads = 1;

  static LayoutParams discipline_preset();
  static LayoutParams specialty_preset();
};

struct NodePosition {
  double x = 0;
  double y = 0;

  bool operator==(const NodePosition&) const = default;
};

/// Runs the layout from seeded uniform positions in
/// [-initial_extent, initial_extent]^2.
std::vector<NodePosition> force_atlas(const WeightedGraph& graph, const LayoutParams& params,
                                      std::uint64_t seed);

/// Runs the layout from the given start positions.
std::vector<NodePosition> force_atlas(const WeightedGraph& graph, const LayoutParams& params,
                                      std::vector<NodePosition> start);

/// Net force on every node for the given positions, with exact or
/// Barnes-Hut repulsion. Weights are used as given.
std::vector<NodePosition> layout_forces(const WeightedGraph& graph, const LayoutParams& params,
                                        std::span<const NodePosition> pos, bool barnes_hut);

/// Multiplies the weight of every edge whose endpoints share a parent.
WeightedGraph scale_sibling_edges(const WeightedGraph& graph, std::span<const std::uint32_t> parent,
                                  double factor);

/// Centers the children on the parent and shrinks their spread:
///   x_a = (x - mean_x) * m / n + x_parent, likewise for y.
std::vector<NodePosition> place_children(std::span<const NodePosition> raw, NodePosition parent, double m);

struct HierarchyLayoutOptions {
  LayoutParams discipline = LayoutParams::discipline_preset();
  LayoutParams specialty = LayoutParams::specialty_preset();
  double sibling_factor = 3.0;
  double expansion = 0.5;  // m
  std::uint64_t seed = 0;
};

struct HierarchyLayout {
  std::size_t discipline_level = 0;
  std::size_t specialty_level = 0;
  std::vector<NodePosition> disciplines;  // by discipline cluster id
  std::vector<NodePosition> specialties;  // by specialty cluster id
  WeightedGraph discipline_graph;         // sibling-scaled
  WeightedGraph specialty_graph;          // specialty meta-graph
};

/// Level indices and the two networks of a hierarchy layout, without
/// positions.
HierarchyLayout layout_graphs(const ClusterTree& tree, const WeightedGraph& publication_graph,
                              double sibling_factor);

/// Lays out disciplines on the sibling-scaled discipline network, then each
/// discipline's specialties on their own network, placed around the parent.
HierarchyLayout layout_hierarchy(const ClusterTree& tree, const WeightedGraph& publication_graph,
                                 const HierarchyLayoutOptions& options);

}  // namespace sciatlas
