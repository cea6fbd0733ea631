#include "sciatlas/mapbuild.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "sciatlas/util.hpp"

namespace sciatlas {

std::string_view to_string(MapLevel l) { return l == MapLevel::kDiscipline ? "Discipline" : "Specialty"; }

MapLevel parse_map_level(std::string_view s) {
  if (s == "Discipline") return MapLevel::kDiscipline;
  if (s == "Specialty") return MapLevel::kSpecialty;
  throw InputError("unknown map level '" + std::string(s) + "'");
}

double node_size(double count, MapLevel level) {
  const double s = std::sqrt(std::max(count, 0.0));
  return level == MapLevel::kDiscipline ? s : s / 2.0;
}

std::string link_query(std::string_view base, const std::vector<std::string>& ids) {
  std::string url(base);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) url += "+OR+";
    url += ids[i];
    url += "[uid]";
  }
  return url;
}

Hyperlinks make_hyperlinks(std::vector<std::string> ids, std::string_view base) {
  Hyperlinks out;
  const auto n = ids.size();
  if (n > kMaxLinkedPublications) {
    out.sentinel = "Too many publ. (" + std::to_string(n) + ")";
    return out;
  }
  if (n == 0) return out;
  std::sort(ids.begin(), ids.end(), [](const auto& a, const auto& b) { return id_less(a, b); });
  for (std::size_t lo = 0; lo < n; lo += kLinkBatch) {
    const auto hi = std::min(n, lo + kLinkBatch);
    std::vector<std::string> batch(ids.begin() + static_cast<std::ptrdiff_t>(lo),
                                   ids.begin() + static_cast<std::ptrdiff_t>(hi));
    out.links.push_back({std::to_string(lo + 1) + "-" + std::to_string(hi), link_query(base, batch)});
  }
  return out;
}

std::string format_rgba(int r, int g, int b, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "rgba(%d,%d,%d,%g)", r, g, b, a);
  return buf;
}

std::string area_color(std::size_t i, std::size_t n) {
  constexpr double kSaturation = 0.75;
  constexpr double kLightness = 0.35;
  const double h = n ? 360.0 * static_cast<double>(i) / static_cast<double>(n) : 0.0;
  const double c = (1.0 - std::abs(2.0 * kLightness - 1.0)) * kSaturation;
  const double hp = h / 60.0;
  const double x = c * (1.0 - std::abs(std::fmod(hp, 2.0) - 1.0));
  double r = 0, g = 0, b = 0;
  switch (static_cast<int>(hp) % 6) {
    case 0: r = c, g = x; break;
    case 1: r = x, g = c; break;
    case 2: g = c, b = x; break;
    case 3: g = x, b = c; break;
    case 4: r = x, b = c; break;
    default: r = c, b = x; break;
  }
  const double m = kLightness - c / 2.0;
  auto ch = [m](double v) { return static_cast<int>(std::lround((v + m) * 255.0)); };
  return format_rgba(ch(r), ch(g), ch(b), 0.5);
}

std::vector<std::string> assign_colors(const ClusterTree& tree, std::size_t level) {
  const auto area = tree.find_level("research_area");
  if (!area) throw Error("cluster tree has no 'research_area' level to color by");
  if (*area < level) throw Error("research_area must be above the colored level");
  const auto up = tree.ancestor_map(level, *area);
  const auto n = tree.level(*area).cluster_count();
  std::vector<std::string> palette(n);
  for (std::size_t i = 0; i < n; ++i) palette[i] = area_color(i, n);
  std::vector<std::string> out(up.size());
  for (std::size_t c = 0; c < up.size(); ++c) out[c] = palette[up[c]];
  return out;
}

std::optional<std::size_t> BaseMap::find(std::string_view id) const {
  auto it = std::lower_bound(nodes.begin(), nodes.end(), id,
                             [](const MapNode& n, std::string_view v) { return path_less(n.id, v); });
  if (it == nodes.end() || it->id != id) return std::nullopt;
  return static_cast<std::size_t>(it - nodes.begin());
}

bool path_less(std::string_view a, std::string_view b) {
  while (!a.empty() && !b.empty()) {
    const auto da = a.find('.');
    const auto db = b.find('.');
    const auto ha = a.substr(0, da);
    const auto hb = b.substr(0, db);
    if (ha != hb) return id_less(ha, hb);
    a = da == std::string_view::npos ? std::string_view{} : a.substr(da + 1);
    b = db == std::string_view::npos ? std::string_view{} : b.substr(db + 1);
  }
  return a.empty() && !b.empty();
}

std::vector<Edge> top_k_edges(const WeightedGraph& graph, std::size_t k) {
  std::vector<Edge> out;
  if (k == 0) return out;
  std::vector<char> keep(graph.edge_count(), 0);
  const auto& edges = graph.edges();
  std::vector<std::vector<std::size_t>> incident(graph.node_count());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    incident[edges[e].u].push_back(e);
    incident[edges[e].v].push_back(e);
  }
  for (std::uint32_t i = 0; i < graph.node_count(); ++i) {
    auto& inc = incident[i];
    const auto take = std::min(k, inc.size());
    std::partial_sort(inc.begin(), inc.begin() + static_cast<std::ptrdiff_t>(take), inc.end(),
                      [&](std::size_t a, std::size_t b) {
                        if (edges[a].weight != edges[b].weight) return edges[a].weight > edges[b].weight;
                        return a < b;
                      });
    for (std::size_t j = 0; j < take; ++j) keep[inc[j]] = 1;
  }
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (keep[e]) out.push_back(edges[e]);
  }
  return out;
}

namespace {

std::string html_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_links(const Hyperlinks& h) {
  if (h.sentinel) return html_escape(*h.sentinel);
  std::string out;
  for (std::size_t i = 0; i < h.links.size(); ++i) {
    if (i) out += ' ';
    out += "<a href=\"" + html_escape(h.links[i].url) + "\" target=\"_blank\">" + h.links[i].label + "</a>";
  }
  return out;
}

const ClusterLabel& label_of(const LabelSet& labels, const ClusterLevel& level, std::uint32_t c) {
  auto it = labels.find(level.spec.name);
  if (it == labels.end() || c >= it->second.size()) {
    throw Error("no label for cluster " + level.paths[c] + " (level " + level.spec.name + ")");
  }
  return it->second[c];
}

std::vector<std::vector<std::string>> ids_by_cluster(const ClusterTree& tree, std::size_t level,
                                                     const Corpus& corpus) {
  const auto assign = tree.publication_assignment(level);
  std::vector<std::vector<std::string>> out(tree.level(level).cluster_count());
  for (std::uint32_t p = 0; p < assign.size(); ++p) out[assign[p]].push_back(corpus[p].pub_id);
  return out;
}

}  // namespace

std::string children_summary(std::vector<ChildEntry> children) {
  std::stable_sort(children.begin(), children.end(),
                   [](const ChildEntry& a, const ChildEntry& b) { return a.count > b.count; });
  std::string out = "<ul style=\"list-style-type: none\">";
  for (const auto& c : children) {
    out += "<li>" + html_escape(c.label) + " - # Publ.: " + std::to_string(c.count);
    const auto links = render_links(c.links);
    if (!links.empty()) out += " " + links;
    out += "</li>";
  }
  out += "</ul>";
  return out;
}

BaseMap build_base_map(const ClusterTree& tree, const LabelSet& labels, const HierarchyLayout& layout,
                       const Corpus& corpus, const MapBuildOptions& options) {
  if (tree.publication_count() != corpus.size()) throw Error("cluster tree and corpus differ in size");
  const auto dl = layout.discipline_level;
  const auto sl = layout.specialty_level;
  const auto& disc = tree.level(dl);
  const auto& spec = tree.level(sl);
  if (layout.disciplines.size() != disc.cluster_count()) {
    throw Error("no position for discipline " + disc.paths[std::min(layout.disciplines.size(),
                                                                      disc.cluster_count() - 1)]);
  }
  if (layout.specialties.size() != spec.cluster_count()) {
    throw Error("no position for specialty " + spec.paths[std::min(layout.specialties.size(),
                                                                     spec.cluster_count() - 1)]);
  }

  const auto colors = assign_colors(tree, dl);
  const auto disc_ids = ids_by_cluster(tree, dl, corpus);
  const auto spec_ids = ids_by_cluster(tree, sl, corpus);

  std::vector<Hyperlinks> spec_links(spec.cluster_count());
  for (std::uint32_t s = 0; s < spec.cluster_count(); ++s) {
    spec_links[s] = make_hyperlinks(spec_ids[s], options.link_base);
  }

  std::vector<std::vector<ChildEntry>> spec_children(spec.cluster_count());
  if (sl > 0) {
    const auto& topic = tree.level(sl - 1);
    const auto topic_ids = ids_by_cluster(tree, sl - 1, corpus);
    for (std::uint32_t t = 0; t < topic.cluster_count(); ++t) {
      const auto& lab = label_of(labels, topic, t);
      spec_children[spec.parent[t]].push_back(
          {lab.label, topic.sizes[t], make_hyperlinks(topic_ids[t], options.link_base)});
    }
  }
  std::vector<std::vector<ChildEntry>> disc_children(disc.cluster_count());
  for (std::uint32_t s = 0; s < spec.cluster_count(); ++s) {
    disc_children[disc.parent[s]].push_back({label_of(labels, spec, s).label, spec.sizes[s], spec_links[s]});
  }

  BaseMap map;
  for (std::uint32_t d = 0; d < disc.cluster_count(); ++d) {
    const auto& lab = label_of(labels, disc, d);
    MapNode n;
    n.id = disc.paths[d];
    n.label = lab.label;
    n.level = MapLevel::kDiscipline;
    n.publ_count = disc.sizes[d];
    n.size = node_size(static_cast<double>(n.publ_count), n.level);
    n.color = colors[d];
    n.additional_terms = lab.additional_terms;
    n.hyperlinks = make_hyperlinks(disc_ids[d], options.link_base);
    n.children_summary = children_summary(disc_children[d]);
    n.x = layout.disciplines[d].x;
    n.y = layout.disciplines[d].y;
    map.nodes.push_back(std::move(n));
  }
  for (std::uint32_t s = 0; s < spec.cluster_count(); ++s) {
    const auto& lab = label_of(labels, spec, s);
    MapNode n;
    n.id = spec.paths[s];
    n.label = lab.label;
    n.level = MapLevel::kSpecialty;
    n.publ_count = spec.sizes[s];
    n.size = node_size(static_cast<double>(n.publ_count), n.level);
    n.color = colors[disc.parent[s]];
    n.additional_terms = lab.additional_terms;
    n.hyperlinks = spec_links[s];
    n.children_summary = children_summary(spec_children[s]);
    n.x = layout.specialties[s].x;
    n.y = layout.specialties[s].y;
    n.parent = disc.paths[disc.parent[s]];
    map.nodes.push_back(std::move(n));
  }
  std::sort(map.nodes.begin(), map.nodes.end(),
            [](const MapNode& a, const MapNode& b) { return path_less(a.id, b.id); });

  auto add_edges = [&](const std::vector<Edge>& edges, const std::vector<std::string>& paths) {
    for (const auto& e : edges) {
      MapEdge me{paths[e.u], paths[e.v], e.weight};
      if (path_less(me.target, me.source)) std::swap(me.source, me.target);
      map.edges.push_back(std::move(me));
    }
  };
  add_edges(top_k_edges(layout.discipline_graph, options.top_k), disc.paths);
  std::vector<Edge> intra;
  for (const auto& e : layout.specialty_graph.edges()) {
    if (disc.parent[e.u] == disc.parent[e.v]) intra.push_back(e);
  }
  add_edges(top_k_edges(WeightedGraph(layout.specialty_graph.node_weights(), std::move(intra)), options.top_k),
            spec.paths);
  std::sort(map.edges.begin(), map.edges.end(), [](const MapEdge& a, const MapEdge& b) {
    if (a.source != b.source) return path_less(a.source, b.source);
    return path_less(a.target, b.target);
  });

  map.metadata["publications"] = corpus.size();
  map.metadata["disciplines"] = disc.cluster_count();
  map.metadata["specialties"] = spec.cluster_count();
  return map;
}

}  // namespace sciatlas
