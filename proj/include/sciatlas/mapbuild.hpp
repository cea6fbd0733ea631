#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sciatlas/corpus.hpp"
#include "sciatlas/hierarchy.hpp"
#include "sciatlas/labeler.hpp"
#include "sciatlas/layout.hpp"

namespace sciatlas {

inline constexpr std::string_view kDefaultLinkBase = "https://pubmed.ncbi.nlm.nih.gov/?term=";
inline constexpr std::size_t kLinkBatch = 500;
inline constexpr std::size_t kMaxLinkedPublications = 5000;

enum class MapLevel { kDiscipline, kSpecialty };

std::string_view to_string(MapLevel l);  // "Discipline" / "Specialty"
MapLevel parse_map_level(std::string_view s);

/// sqrt(count) for disciplines, sqrt(count) / 2 for specialties.
double node_size(double count, MapLevel level);

struct Hyperlink {
  std::string label;  // "1-500"
  std::string url;

  bool operator==(const Hyperlink&) const = default;
};

/// Either batched links or, above the cap, the "Too many publ. (N)" text.
struct Hyperlinks {
  std::vector<Hyperlink> links;
  std::optional<std::string> sentinel;

  bool operator==(const Hyperlinks&) const = default;
};

/// base + id1[uid]+OR+id2[uid]+OR+...
std::string link_query(std::string_view base, const std::vector<std::string>& ids);

/// Sorts the ids (numeric-aware) and batches them 500 to a link; more than
/// 5000 ids produce the sentinel instead.
Hyperlinks make_hyperlinks(std::vector<std::string> ids, std::string_view base = kDefaultLinkBase);

std::string format_rgba(int r, int g, int b, double a);

/// Hue i*360/n on a fixed saturation/lightness, alpha 0.5.
std::string area_color(std::size_t i, std::size_t n);

/// Color per cluster of `level`, taken from its research-area ancestor.
std::vector<std::string> assign_colors(const ClusterTree& tree, std::size_t level);

struct MapNode {
  std::string id;
  std::string label;
  double size = 0;
  std::string color;
  std::vector<std::string> additional_terms;
  MapLevel level = MapLevel::kDiscipline;
  std::int64_t publ_count = 0;
  Hyperlinks hyperlinks;
  std::string children_summary;
  double x = 0;
  double y = 0;
  std::string parent;  // discipline id of a specialty, empty otherwise
  bool hidden = false;
  std::optional<std::int64_t> overlay_count;
  std::optional<double> overlay_value;

  bool operator==(const MapNode&) const = default;
};

struct MapEdge {
  std::string source;
  std::string target;
  double weight = 0;

  bool operator==(const MapEdge&) const = default;
};

struct BaseMap {
  std::vector<MapNode> nodes;  // sorted by id
  std::vector<MapEdge> edges;  // sorted by (source, target)
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  std::optional<std::size_t> find(std::string_view id) const;
  bool operator==(const BaseMap& o) const {
    return nodes == o.nodes && edges == o.edges && metadata == o.metadata;
  }
};

/// Component-wise numeric order of dotted ids ("2" < "10", "1" < "1.1").
bool path_less(std::string_view a, std::string_view b);

struct MapBuildOptions {
  std::string link_base = std::string(kDefaultLinkBase);
  std::size_t top_k = 5;  // edges kept per node; 0 keeps none
};

/// Keeps an edge when it is among the k heaviest of either endpoint.
std::vector<Edge> top_k_edges(const WeightedGraph& graph, std::size_t k);

/// `<ul style="list-style-type: none"><li>label - # Publ.: N links</li>...</ul>`,
/// children by count, largest first.
struct ChildEntry {
  std::string label;
  std::int64_t count = 0;
  Hyperlinks links;
};
std::string children_summary(std::vector<ChildEntry> children);

BaseMap build_base_map(const ClusterTree& tree, const LabelSet& labels, const HierarchyLayout& layout,
                       const Corpus& corpus, const MapBuildOptions& options);

}  // namespace sciatlas
