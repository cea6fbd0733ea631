#include "sciatlas/overlay.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "sciatlas/util.hpp"

namespace sciatlas {

bool classify_open_access(OaStatus status) {
  switch (status) {
    case OaStatus::kGold:
    case OaStatus::kBronze:
    case OaStatus::kGreen:
    case OaStatus::kHybrid:
      return true;
    default:
      return false;
  }
}

bool classify_open_access(std::string_view status) {
  std::string s(trim(status));
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  const auto parsed = parse_oa_status(s);
  return parsed && classify_open_access(*parsed);
}

MapMembership map_membership(const BaseMap& base, const ClusterTree& tree) {
  const auto dl = tree.find_level("discipline");
  const auto sl = tree.find_level("specialty");
  if (!dl || !sl) throw Error("cluster tree needs 'discipline' and 'specialty' levels");
  auto lookup = [&](std::size_t level) {
    const auto& lvl = tree.level(level);
    std::vector<std::uint32_t> node(lvl.cluster_count());
    for (std::uint32_t c = 0; c < lvl.cluster_count(); ++c) {
      const auto idx = base.find(lvl.paths[c]);
      if (!idx) throw Error("base map has no node for cluster " + lvl.paths[c]);
      node[c] = static_cast<std::uint32_t>(*idx);
    }
    const auto assign = tree.publication_assignment(level);
    std::vector<std::uint32_t> out(assign.size());
    for (std::size_t p = 0; p < assign.size(); ++p) out[p] = node[assign[p]];
    return out;
  };
  return {lookup(*dl), lookup(*sl)};
}

Gradient Gradient::standard() { return Gradient{{{0.0, 68, 1, 84}, {0.3, 53, 183, 121}, {1.0, 253, 231, 37}}}; }

std::string Gradient::at(double t) const {
  if (stops.empty()) return std::string(kNeutralColor);
  if (!std::isfinite(t)) t = 0;
  t = std::clamp(t, 0.0, 1.0);
  if (t <= stops.front().position) return format_rgba(stops.front().r, stops.front().g, stops.front().b, 0.5);
  for (std::size_t i = 1; i < stops.size(); ++i) {
    const auto& a = stops[i - 1];
    const auto& b = stops[i];
    if (t <= b.position) {
      const double span = b.position - a.position;
      const double f = span > 0 ? (t - a.position) / span : 1.0;
      auto mix = [f](int x, int y) { return static_cast<int>(std::lround(x + (y - x) * f)); };
      return format_rgba(mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b), 0.5);
    }
  }
  return format_rgba(stops.back().r, stops.back().g, stops.back().b, 0.5);
}

namespace {

void check_membership(const BaseMap& base, const MapMembership& m) {
  if (m.discipline.size() != m.specialty.size()) throw Error("inconsistent map membership");
  for (std::size_t p = 0; p < m.discipline.size(); ++p) {
    if (m.discipline[p] >= base.nodes.size() || m.specialty[p] >= base.nodes.size()) {
      throw Error("map membership refers to a missing node");
    }
  }
}

}  // namespace

BaseMap project_subset(const BaseMap& base, const MapMembership& membership,
                       std::span<const std::uint32_t> subset) {
  check_membership(base, membership);
  std::vector<std::int64_t> count(base.nodes.size(), 0);
  for (auto p : subset) {
    if (p >= membership.discipline.size()) throw Error("subset member outside the corpus");
    ++count[membership.discipline[p]];
    ++count[membership.specialty[p]];
  }
  BaseMap out = base;
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    auto& n = out.nodes[i];
    n.overlay_count = count[i];
    n.overlay_value.reset();
    n.size = node_size(static_cast<double>(count[i]), n.level);
    n.hidden = count[i] == 0;
  }
  out.metadata["overlay"] = {{"mode", "subset_size"}, {"subset_size", subset.size()}};
  return out;
}

MetricValues open_access_metric(const Corpus& corpus, bool unknown_has_value) {
  MetricValues out(corpus.size());
  for (std::uint32_t p = 0; p < corpus.size(); ++p) {
    const auto s = corpus[p].oa_status;
    if (s == OaStatus::kUnknown && !unknown_has_value) continue;
    out[p] = classify_open_access(s) ? 1.0 : 0.0;
  }
  return out;
}

MetricValues metric_from_file(const MetricFile& file, std::size_t publication_count) {
  MetricValues out(publication_count);
  for (const auto& [p, v] : file.values) {
    if (p < publication_count) out[p] = v;
  }
  return out;
}

BaseMap color_by_metric(const BaseMap& base, const MapMembership& membership, const MetricValues& metric,
                        const Gradient& gradient, DenominatorRule rule, MetricRange range) {
  check_membership(base, membership);
  if (metric.size() != membership.discipline.size()) throw Error("metric does not cover the corpus");
  if (!(range.hi > range.lo)) throw Error("metric range must have hi > lo");
  std::vector<double> sum(base.nodes.size(), 0.0);
  std::vector<std::int64_t> denom(base.nodes.size(), 0);
  for (std::size_t p = 0; p < metric.size(); ++p) {
    if (!metric[p] && rule == DenominatorRule::kWithValueOnly) continue;
    const double v = metric[p].value_or(0.0);
    for (auto node : {membership.discipline[p], membership.specialty[p]}) {
      sum[node] += v;
      ++denom[node];
    }
  }
  BaseMap out = base;
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    auto& n = out.nodes[i];
    n.overlay_count = denom[i];
    if (denom[i] == 0) {
      n.overlay_value.reset();
      n.color = std::string(kNeutralColor);
      continue;
    }
    const double value = sum[i] / static_cast<double>(denom[i]);
    n.overlay_value = value;
    n.color = gradient.at((value - range.lo) / (range.hi - range.lo));
  }
  out.metadata["overlay"] = {
      {"mode", "metric_color"},
      {"denominator", rule == DenominatorRule::kAllMembers ? "all_members" : "with_value_only"},
      {"range", {range.lo, range.hi}}};
  return out;
}

BaseMap cited_by_overlay(const BaseMap& base, const MapMembership& membership, const Corpus& corpus,
                         std::span<const std::uint32_t> focal, const CitedByOptions& options) {
  check_membership(base, membership);
  if (membership.discipline.size() != corpus.size()) throw Error("map membership does not match the corpus");
  std::vector<char> in_focal(corpus.size(), 0);
  for (auto p : focal) {
    if (p >= corpus.size()) throw Error("focal publication outside the corpus");
    in_focal[p] = 1;
  }
  // Links per cited publication.
  std::vector<std::int64_t> links(corpus.size(), 0);
  for (const auto& e : corpus.citations()) {
    if (!in_focal[e.citing]) continue;
    if (options.max_cited_year && corpus[e.cited].year > *options.max_cited_year) continue;
    ++links[e.cited];
  }
  std::vector<std::int64_t> cited(base.nodes.size(), 0), hits(base.nodes.size(), 0);
  for (std::uint32_t p = 0; p < corpus.size(); ++p) {
    if (links[p] == 0) continue;
    for (auto node : {membership.discipline[p], membership.specialty[p]}) {
      ++cited[node];
      hits[node] += links[p];
    }
  }
  double max_value = 1.0;
  for (std::size_t i = 0; i < cited.size(); ++i) {
    if (cited[i] > 0) max_value = std::max(max_value, static_cast<double>(hits[i]) / cited[i]);
  }
  BaseMap out = base;
  for (std::size_t i = 0; i < out.nodes.size(); ++i) {
    auto& n = out.nodes[i];
    n.overlay_count = cited[i];
    n.size = node_size(static_cast<double>(cited[i]), n.level);
    n.hidden = cited[i] == 0;
    if (cited[i] == 0) {
      n.overlay_value.reset();
      n.color = std::string(kNeutralColor);
      continue;
    }
    const double value = static_cast<double>(hits[i]) / static_cast<double>(cited[i]);
    n.overlay_value = value;
    n.color = options.gradient.at(max_value > 1.0 ? (value - 1.0) / (max_value - 1.0) : 0.0);
  }
  nlohmann::ordered_json meta = {{"mode", "cited_by"}, {"focal_size", focal.size()}, {"range", {1.0, max_value}}};
  if (options.max_cited_year) meta["max_cited_year"] = *options.max_cited_year;
  out.metadata["overlay"] = std::move(meta);
  return out;
}

}  // namespace sciatlas
