#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "sciatlas/citegraph.hpp"
#include "sciatlas/corpus.hpp"
#include "sciatlas/leiden.hpp"

namespace sciatlas {

enum class SmallClusterMode { kReassignNodes, kMergeClusters };

std::string_view to_string(SmallClusterMode m);
SmallClusterMode parse_small_cluster_mode(std::string_view s);

/// One granularity level of the classification.
struct LevelSpec {
  std::string name;          // topic, specialty, discipline, research_area
  double resolution = 1e-4;  // CPM resolution
  double min_size = 0;       // publications; 0 disables the threshold
  SmallClusterMode mode = SmallClusterMode::kMergeClusters;
};

/// Defaults for the four standard levels. Discipline and research-area
/// resolutions have no canonical value and must be set by the operator.
std::vector<LevelSpec> default_level_specs();

struct ClusterLevel {
  LevelSpec spec;
  /// Level 0: publication index -> cluster. Level k: cluster of level k-1 ->
  /// cluster of level k.
  std::vector<std::uint32_t> parent;
  std::vector<std::int64_t> sizes;  // publications per cluster
  std::vector<std::string> paths;   // dotted ids, e.g. "13.14"
  std::optional<std::uint32_t> unassigned;

  std::size_t cluster_count() const { return sizes.size(); }
};

/// Nested partition of the publications, finest level first.
class ClusterTree {
 public:
  ClusterTree() = default;
  ClusterTree(std::size_t publication_count, std::vector<ClusterLevel> levels);

  std::size_t publication_count() const { return pub_count_; }
  std::size_t depth() const { return levels_.size(); }
  const ClusterLevel& level(std::size_t i) const { return levels_.at(i); }
  const std::vector<ClusterLevel>& levels() const { return levels_; }
  std::optional<std::size_t> find_level(std::string_view name) const;

  /// Publication index -> cluster id at the given level.
  std::vector<std::uint32_t> publication_assignment(std::size_t level) const;
  /// Cluster at `level` -> ancestor cluster at `ancestor_level`.
  std::vector<std::uint32_t> ancestor_map(std::size_t level, std::size_t ancestor_level) const;
  /// Child clusters (one level down) of a cluster, in id order.
  std::vector<std::uint32_t> children(std::size_t level, std::uint32_t cluster) const;

  bool operator==(const ClusterTree& o) const;

 private:
  void assign_paths();

  std::size_t pub_count_ = 0;
  std::vector<ClusterLevel> levels_;
};

struct HierarchyOptions {
  std::uint64_t seed = 0;
  int max_iterations = 100;
};

/// Level 0 clusters the publication graph; every further level clusters the
/// aggregated network of the level below. Each level is followed by its
/// small-cluster handling. Meta-networks are always aggregated from the
/// publication graph so edge weights stay averages over publication pairs.
ClusterTree build_hierarchy(const Corpus& corpus, const WeightedGraph& graph,
                            const std::vector<LevelSpec>& specs, const HierarchyOptions& options);

/// Meta-network of a level: one node per cluster.
WeightedGraph level_graph(const ClusterTree& tree, const WeightedGraph& graph, std::size_t level);

/// Writes level_<name>.tsv (`pub_id<TAB>cluster_path`) per level and
/// clusters.tsv (`cluster_path<TAB>level<TAB>size<TAB>flags`).
void write_tree(const std::filesystem::path& dir, const ClusterTree& tree, const Corpus& corpus);
ClusterTree read_tree(const std::filesystem::path& dir, const Corpus& corpus);

}  // namespace sciatlas
