// Small builders shared by the unit and acceptance tests.
#pragma once

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "sciatlas/citegraph.hpp"
#include "sciatlas/corpus.hpp"
#include "sciatlas/hierarchy.hpp"
#include "sciatlas/labeler.hpp"
#include "sciatlas/layout.hpp"
#include "sciatlas/mapbuild.hpp"

namespace testkit {

inline sciatlas::WeightedGraph to_weighted(const oracle::Graph& g) {
  std::vector<sciatlas::Edge> edges;
  for (const auto& [u, v, w] : g.edges) edges.push_back({u, v, w});
  std::vector<double> nw(g.n);
  for (std::size_t i = 0; i < g.n; ++i) nw[i] = g.nw(i);
  return sciatlas::WeightedGraph(std::move(nw), std::move(edges));
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("sciatlas-test-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& s) const { return path_ / s; }

 private:
  std::filesystem::path path_;
};

/// n publications with random years, OA statuses and about `refs` references
/// each.
inline sciatlas::Corpus random_corpus(std::size_t n, double refs, std::mt19937_64& rng) {
  using namespace sciatlas;
  static constexpr OaStatus kStatuses[] = {OaStatus::kGold,   OaStatus::kBronze, OaStatus::kGreen,
                                           OaStatus::kHybrid, OaStatus::kClosed, OaStatus::kUnknown};
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) {
    PublicationRecord r;
    r.pub_id = std::to_string(1000 + i);
    r.year = 1995 + static_cast<int>(rng() % 28);
    r.title = "record " + std::to_string(i);
    r.oa_status = kStatuses[rng() % 6];
    c.add(std::move(r));
  }
  std::vector<CitationEdge> edges;
  const auto m = static_cast<std::size_t>(refs * static_cast<double>(n));
  for (std::size_t k = 0; k < m; ++k) {
    edges.push_back({static_cast<std::uint32_t>(rng() % n), static_cast<std::uint32_t>(rng() % n)});
  }
  c.set_citations(std::move(edges));
  return c;
}

/// topic < specialty < discipline < research_area, every cluster non-empty.
inline sciatlas::ClusterTree random_tree(std::size_t pubs, std::size_t topics, std::size_t specialties,
                                         std::size_t disciplines, std::size_t areas, std::mt19937_64& rng) {
  using namespace sciatlas;
  auto surjective = [&](std::size_t n, std::size_t k) {
    std::vector<std::uint32_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = static_cast<std::uint32_t>(i < k ? i : rng() % k);
    std::shuffle(p.begin(), p.end(), rng);
    return p;
  };
  std::vector<ClusterLevel> levels(4);
  const char* names[] = {"topic", "specialty", "discipline", "research_area"};
  const std::size_t below[] = {pubs, topics, specialties, disciplines};
  const std::size_t count[] = {topics, specialties, disciplines, areas};
  for (int l = 0; l < 4; ++l) {
    levels[l].spec.name = names[l];
    levels[l].parent = surjective(below[l], count[l]);
  }
  return ClusterTree(pubs, std::move(levels));
}

/// Base map with one node per discipline and specialty, ids = cluster paths,
/// sizes from the tree, random coordinates.
inline sciatlas::BaseMap plain_map(const sciatlas::ClusterTree& tree, std::mt19937_64& rng) {
  using namespace sciatlas;
  BaseMap m;
  std::uniform_real_distribution<double> u(-100, 100);
  const auto dl = *tree.find_level("discipline");
  const auto sl = *tree.find_level("specialty");
  const auto up = tree.ancestor_map(sl, dl);
  for (auto [level, kind] : {std::pair{dl, MapLevel::kDiscipline}, std::pair{sl, MapLevel::kSpecialty}}) {
    const auto& lvl = tree.level(level);
    for (std::uint32_t c = 0; c < lvl.cluster_count(); ++c) {
      MapNode n;
      n.id = lvl.paths[c];
      n.label = "cluster " + n.id;
      n.level = kind;
      n.publ_count = lvl.sizes[c];
      n.size = node_size(static_cast<double>(lvl.sizes[c]), kind);
      n.color = "rgba(1,2,3,0.5)";
      n.x = u(rng);
      n.y = u(rng);
      if (kind == MapLevel::kSpecialty) n.parent = tree.level(dl).paths[up[c]];
      m.nodes.push_back(std::move(n));
    }
  }
  std::sort(m.nodes.begin(), m.nodes.end(), [](const MapNode& a, const MapNode& b) { return path_less(a.id, b.id); });
  return m;
}

/// Placeholder labels: "<level> <path>" plus two additional terms.
inline sciatlas::LabelSet dummy_labels(const sciatlas::ClusterTree& tree) {
  sciatlas::LabelSet out;
  for (const auto& lvl : tree.levels()) {
    auto& v = out[lvl.spec.name];
    for (const auto& p : lvl.paths) v.push_back({lvl.spec.name + " " + p, {"extra " + p, "more " + p}});
  }
  return out;
}

/// A full base map through the library's own layout and map builder, with
/// short layout runs.
inline sciatlas::BaseMap built_map(const sciatlas::ClusterTree& tree, const sciatlas::Corpus& corpus,
                                   std::uint64_t seed = 1) {
  using namespace sciatlas;
  HierarchyLayoutOptions o;
  o.discipline.iterations = 100;
  o.specialty.iterations = 100;
  o.seed = seed;
  const auto lay = layout_hierarchy(tree, build_normalized_graph(corpus), o);
  return build_base_map(tree, dummy_labels(tree), lay, corpus, {});
}

}  // namespace testkit
