#include "sciatlas/hierarchy.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <unordered_map>

#include "sciatlas/util.hpp"

namespace sciatlas {

std::string_view to_string(SmallClusterMode m) {
  return m == SmallClusterMode::kReassignNodes ? "reassign_nodes" : "merge_clusters";
}

SmallClusterMode parse_small_cluster_mode(std::string_view s) {
  if (s == "reassign_nodes") return SmallClusterMode::kReassignNodes;
  if (s == "merge_clusters") return SmallClusterMode::kMergeClusters;
  throw InputError("unknown small_cluster_mode '" + std::string(s) + "'");
}

std::vector<LevelSpec> default_level_specs() {
  return {
      {"topic", 1e-4, 50, SmallClusterMode::kReassignNodes},
      {"specialty", 1e-9, 500, SmallClusterMode::kMergeClusters},
      {"discipline", 1e-12, 100000, SmallClusterMode::kMergeClusters},
      {"research_area", 1e-15, 0, SmallClusterMode::kMergeClusters},
  };
}

ClusterTree::ClusterTree(std::size_t publication_count, std::vector<ClusterLevel> levels)
    : pub_count_(publication_count), levels_(std::move(levels)) {
  std::size_t below = pub_count_;
  std::vector<std::int64_t> below_sizes(pub_count_, 1);
  for (auto& lvl : levels_) {
    if (lvl.parent.size() != below) {
      throw Error("level '" + lvl.spec.name + "' maps " + std::to_string(lvl.parent.size()) +
                  " entries, expected " + std::to_string(below));
    }
    std::uint32_t k = 0;
    for (auto p : lvl.parent) k = std::max(k, p + 1);
    lvl.sizes.assign(k, 0);
    for (std::size_t i = 0; i < below; ++i) lvl.sizes[lvl.parent[i]] += below_sizes[i];
    below = k;
    below_sizes = lvl.sizes;
  }
  assign_paths();
}

void ClusterTree::assign_paths() {
  for (std::size_t li = levels_.size(); li-- > 0;) {
    auto& lvl = levels_[li];
    lvl.paths.assign(lvl.cluster_count(), {});
    if (li + 1 == levels_.size()) {
      for (std::uint32_t c = 0; c < lvl.cluster_count(); ++c) lvl.paths[c] = std::to_string(c + 1);
      continue;
    }
    const auto& up = levels_[li + 1];
    std::vector<std::vector<std::uint32_t>> kids(up.cluster_count());
    for (std::uint32_t c = 0; c < lvl.cluster_count(); ++c) kids[up.parent[c]].push_back(c);
    for (std::uint32_t p = 0; p < kids.size(); ++p) {
      auto& ks = kids[p];
      std::stable_sort(ks.begin(), ks.end(),
                       [&](std::uint32_t a, std::uint32_t b) { return lvl.sizes[a] > lvl.sizes[b]; });
      for (std::size_t i = 0; i < ks.size(); ++i) {
        lvl.paths[ks[i]] = up.paths[p] + "." + std::to_string(i + 1);
      }
    }
  }
}

std::optional<std::size_t> ClusterTree::find_level(std::string_view name) const {
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    if (levels_[i].spec.name == name) return i;
  }
  return std::nullopt;
}

std::vector<std::uint32_t> ClusterTree::publication_assignment(std::size_t level) const {
  std::vector<std::uint32_t> out = levels_.at(0).parent;
  for (std::size_t li = 1; li <= level; ++li) {
    for (auto& c : out) c = levels_.at(li).parent[c];
  }
  return out;
}

std::vector<std::uint32_t> ClusterTree::ancestor_map(std::size_t level, std::size_t ancestor_level) const {
  std::vector<std::uint32_t> out(levels_.at(level).cluster_count());
  for (std::uint32_t c = 0; c < out.size(); ++c) out[c] = c;
  for (std::size_t li = level + 1; li <= ancestor_level; ++li) {
    for (auto& c : out) c = levels_.at(li).parent[c];
  }
  return out;
}

std::vector<std::uint32_t> ClusterTree::children(std::size_t level, std::uint32_t cluster) const {
  std::vector<std::uint32_t> out;
  if (level == 0) return out;
  const auto& lvl = levels_.at(level);
  for (std::uint32_t c = 0; c < lvl.parent.size(); ++c) {
    if (lvl.parent[c] == cluster) out.push_back(c);
  }
  return out;
}

bool ClusterTree::operator==(const ClusterTree& o) const {
  if (pub_count_ != o.pub_count_ || levels_.size() != o.levels_.size()) return false;
  for (std::size_t i = 0; i < levels_.size(); ++i) {
    const auto& a = levels_[i];
    const auto& b = o.levels_[i];
    if (a.spec.name != b.spec.name || a.parent != b.parent || a.sizes != b.sizes ||
        a.paths != b.paths || a.unassigned != b.unassigned) {
      return false;
    }
  }
  return true;
}

ClusterTree build_hierarchy(const Corpus& corpus, const WeightedGraph& graph,
                            const std::vector<LevelSpec>& specs, const HierarchyOptions& options) {
  if (graph.node_count() != corpus.size()) throw Error("graph does not match corpus");
  if (specs.empty()) throw Error("at least one level is required");
  std::vector<ClusterLevel> levels;
  std::vector<std::uint32_t> pub_to_cluster;
  for (std::size_t li = 0; li < specs.size(); ++li) {
    const auto& spec = specs[li];
    const WeightedGraph level_net = li == 0 ? graph : aggregate_graph(graph, Partition{pub_to_cluster});
    LeidenOptions lo;
    lo.resolution = spec.resolution;
    lo.seed = derive_seed(options.seed, li);
    lo.max_iterations = options.max_iterations;
    Partition p = leiden(level_net, lo);

    ClusterLevel lvl;
    lvl.spec = spec;
    if (spec.min_size > 0) {
      if (spec.mode == SmallClusterMode::kReassignNodes) {
        auto r = reassign_small_clusters(level_net, p, spec.min_size);
        p = std::move(r.partition);
        lvl.unassigned = r.unassigned;
      } else {
        std::vector<std::uint32_t> composed(corpus.size());
        for (std::size_t i = 0; i < composed.size(); ++i) {
          composed[i] = p.assignment[li == 0 ? i : pub_to_cluster[i]];
        }
        const auto meta = aggregate_graph(graph, Partition{composed});
        p = merge_small_clusters(meta, p, spec.min_size);
      }
    }
    lvl.parent = p.assignment;
    if (li == 0) {
      pub_to_cluster = p.assignment;
    } else {
      for (auto& c : pub_to_cluster) c = p.assignment[c];
    }
    levels.push_back(std::move(lvl));
  }
  return ClusterTree(corpus.size(), std::move(levels));
}

WeightedGraph level_graph(const ClusterTree& tree, const WeightedGraph& graph, std::size_t level) {
  return aggregate_graph(graph, Partition{tree.publication_assignment(level)});
}

void write_tree(const std::filesystem::path& dir, const ClusterTree& tree, const Corpus& corpus) {
  std::filesystem::create_directories(dir);
  if (tree.publication_count() != corpus.size()) throw Error("tree does not match corpus");
  for (std::size_t li = 0; li < tree.depth(); ++li) {
    const auto& lvl = tree.level(li);
    const auto path = dir / ("level_" + lvl.spec.name + ".tsv");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path.string());
    const auto assign = tree.publication_assignment(li);
    for (std::uint32_t i = 0; i < corpus.size(); ++i) {
      out << corpus[i].pub_id << '\t' << lvl.paths[assign[i]] << '\n';
    }
  }
  const auto path = dir / "clusters.tsv";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "# cluster_path\tlevel\tsize\tflags\n";
  for (std::size_t li = 0; li < tree.depth(); ++li) {
    const auto& lvl = tree.level(li);
    for (std::uint32_t c = 0; c < lvl.cluster_count(); ++c) {
      out << lvl.paths[c] << '\t' << lvl.spec.name << '\t' << lvl.sizes[c] << '\t'
          << (lvl.unassigned == c ? "unassigned" : "") << '\n';
    }
  }
}

ClusterTree read_tree(const std::filesystem::path& dir, const Corpus& corpus) {
  const auto manifest = dir / "clusters.tsv";
  std::ifstream in(manifest);
  if (!in) throw InputError("cannot read " + manifest.string());
  struct Lvl {
    std::string name;
    std::vector<std::string> paths;
    std::unordered_map<std::string, std::uint32_t> index;
    std::optional<std::uint32_t> unassigned;
  };
  std::vector<Lvl> lv;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    auto cols = split(line, '\t');
    if (cols.size() < 3) throw InputError(manifest.string() + ": malformed row '" + line + "'");
    if (lv.empty() || lv.back().name != cols[1]) {
      for (const auto& l : lv) {
        if (l.name == cols[1]) throw InputError(manifest.string() + ": level rows are not contiguous");
      }
      lv.push_back({cols[1], {}, {}, std::nullopt});
    }
    auto& l = lv.back();
    const auto id = static_cast<std::uint32_t>(l.paths.size());
    l.index.emplace(cols[0], id);
    l.paths.push_back(cols[0]);
    if (cols.size() > 3 && trim(cols[3]) == "unassigned") l.unassigned = id;
  }
  if (lv.empty()) throw InputError(manifest.string() + ": no clusters");

  std::vector<ClusterLevel> levels(lv.size());
  for (std::size_t li = 0; li < lv.size(); ++li) {
    levels[li].spec.name = lv[li].name;
    levels[li].unassigned = lv[li].unassigned;
    if (li == 0) continue;
    levels[li].parent.resize(lv[li - 1].paths.size());
    for (std::uint32_t c = 0; c < lv[li - 1].paths.size(); ++c) {
      const auto& p = lv[li - 1].paths[c];
      const auto dot = p.rfind('.');
      const auto up = dot == std::string::npos ? std::string() : p.substr(0, dot);
      const auto it = lv[li].index.find(up);
      if (it == lv[li].index.end()) {
        throw InputError(manifest.string() + ": cluster " + p + " has no parent at level " + lv[li].name);
      }
      levels[li].parent[c] = it->second;
    }
  }

  const auto first = dir / ("level_" + lv[0].name + ".tsv");
  std::ifstream lf(first);
  if (!lf) throw InputError("cannot read " + first.string());
  levels[0].parent.assign(corpus.size(), UINT32_MAX);
  std::size_t lineno = 0;
  while (std::getline(lf, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 2) throw InputError(first.string() + ":" + std::to_string(lineno) + ": malformed row");
    const auto pub = corpus.find(cols[0]);
    if (!pub) throw InputError(first.string() + ": unknown pub_id " + cols[0]);
    const auto it = lv[0].index.find(cols[1]);
    if (it == lv[0].index.end()) throw InputError(first.string() + ": unknown cluster " + cols[1]);
    levels[0].parent[*pub] = it->second;
  }
  for (std::uint32_t i = 0; i < corpus.size(); ++i) {
    if (levels[0].parent[i] == UINT32_MAX) {
      throw InputError(first.string() + ": publication " + corpus[i].pub_id + " is not assigned");
    }
  }
  ClusterTree tree(corpus.size(), std::move(levels));
  for (std::size_t li = 0; li < lv.size(); ++li) {
    if (tree.level(li).paths != lv[li].paths) {
      throw InputError(manifest.string() + ": cluster paths are inconsistent with the nesting");
    }
  }
  return tree;
}

}  // namespace sciatlas
