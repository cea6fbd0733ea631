#include "sciatlas/export.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>

#include "json_schema.hpp"
#include "schema_text.hpp"
#include "sciatlas/util.hpp"

namespace sciatlas {

using nlohmann::json;
using nlohmann::ordered_json;

double round_coordinate(double v) {
  const double r = std::round(v * 1e4) / 1e4;
  return r == 0.0 ? 0.0 : r;  // no "-0.0" in the output
}

std::string_view map_data_schema() { return generated::kMapDataSchema; }

namespace {

ordered_json links_to_json(const Hyperlinks& h) {
  if (h.sentinel) return *h.sentinel;
  ordered_json arr = ordered_json::array();
  for (const auto& l : h.links) arr.push_back({{"label", l.label}, {"url", l.url}});
  return arr;
}

Hyperlinks links_from_json(const ordered_json& j) {
  Hyperlinks h;
  if (j.is_string()) {
    h.sentinel = j.get<std::string>();
    return h;
  }
  for (const auto& l : j) h.links.push_back({l.at("label").get<std::string>(), l.at("url").get<std::string>()});
  return h;
}

void write_text(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.close();
  if (!out) throw Error("failed writing " + path.string());
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string html_escape(std::string_view s) {
  std::string out;
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

std::string host_page(const BundleConfig& config) {
  std::string page = R"(<!DOCTYPE html>
<html lang="en">
<head>
<meta charset="utf-8">
<meta name="viewport" content="width=device-width, initial-scale=1">
<title>)" + html_escape(config.title) +
                     R"(</title>
<link rel="stylesheet" href="viewer/sciatlas-viewer.css">
</head>
<body>
<div id="sciatlas-map"></div>
<script src="viewer/sciatlas-viewer.js"></script>
<script>
SciAtlasViewer.load(document.getElementById("sciatlas-map"), {data: "data.json", config: "config.json"});
</script>
</body>
</html>
)";
  return page;
}

}  // namespace

ordered_json map_to_json(const BaseMap& map) {
  ordered_json j;
  j["metadata"] = map.metadata;
  ordered_json nodes = ordered_json::array();
  for (const auto& n : map.nodes) {
    ordered_json attrs;
    attrs["Additional terms"] = n.additional_terms;
    attrs["Level"] = to_string(n.level);
    attrs["# Publ."] = n.publ_count;
    attrs["Get list in PubMed"] = links_to_json(n.hyperlinks);
    attrs["Children"] = n.children_summary;
    if (!n.parent.empty()) attrs["parent"] = n.parent;
    if (n.overlay_count) attrs["overlay_count"] = *n.overlay_count;
    if (n.overlay_value) attrs["overlay_value"] = *n.overlay_value;
    nodes.push_back({{"id", n.id},
                     {"label", n.label},
                     {"x", round_coordinate(n.x)},
                     {"y", round_coordinate(n.y)},
                     {"size", round_coordinate(n.size)},
                     {"color", n.color},
                     {"hidden", n.hidden},
                     {"attributes", std::move(attrs)}});
  }
  j["nodes"] = std::move(nodes);
  ordered_json edges = ordered_json::array();
  for (std::size_t i = 0; i < map.edges.size(); ++i) {
    const auto& e = map.edges[i];
    edges.push_back({{"id", "e" + std::to_string(i)}, {"source", e.source}, {"target", e.target}, {"weight", e.weight}});
  }
  j["edges"] = std::move(edges);
  return j;
}

BaseMap map_from_json(const ordered_json& j) {
  try {
    BaseMap map;
    map.metadata = j.at("metadata");
    for (const auto& jn : j.at("nodes")) {
      MapNode n;
      n.id = jn.at("id").get<std::string>();
      n.label = jn.at("label").get<std::string>();
      n.x = jn.at("x").get<double>();
      n.y = jn.at("y").get<double>();
      n.size = jn.at("size").get<double>();
      n.color = jn.at("color").get<std::string>();
      n.hidden = jn.value("hidden", false);
      const auto& a = jn.at("attributes");
      n.additional_terms = a.at("Additional terms").get<std::vector<std::string>>();
      n.level = parse_map_level(a.at("Level").get<std::string>());
      n.publ_count = a.at("# Publ.").get<std::int64_t>();
      n.hyperlinks = links_from_json(a.at("Get list in PubMed"));
      n.children_summary = a.at("Children").get<std::string>();
      n.parent = a.value("parent", std::string{});
      if (a.contains("overlay_count")) n.overlay_count = a.at("overlay_count").get<std::int64_t>();
      if (a.contains("overlay_value")) n.overlay_value = a.at("overlay_value").get<double>();
      map.nodes.push_back(std::move(n));
    }
    for (const auto& je : j.at("edges")) {
      map.edges.push_back(
          {je.at("source").get<std::string>(), je.at("target").get<std::string>(), je.at("weight").get<double>()});
    }
    return map;
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed map data: ") + e.what());
  }
}

std::string serialize_map(const BaseMap& map) { return map_to_json(map).dump(2) + "\n"; }

BaseMap parse_map(std::string_view text) {
  ordered_json j;
  try {
    j = ordered_json::parse(text);
  } catch (const json::exception& e) {
    throw InputError(std::string("map data is not valid JSON: ") + e.what());
  }
  return map_from_json(j);
}

ordered_json BundleConfig::to_json() const {
  ordered_json j;
  j["title"] = title;
  j["description"] = description;
  ordered_json leg = ordered_json::array();
  for (const auto& l : legend) leg.push_back({{"label", l.label}, {"color", l.color}});
  j["legend"] = std::move(leg);
  ordered_json stops = ordered_json::array();
  for (const auto& s : gradient_stops) {
    stops.push_back({{"position", s.position}, {"color", format_rgba(s.r, s.g, s.b, 0.5)}});
  }
  j["gradientStops"] = std::move(stops);
  j["nodeLevelVisibility"] = {{"Discipline", show_disciplines}, {"Specialty", show_specialties}};
  j["maxZoom"] = max_zoom;
  j["minZoom"] = min_zoom;
  j["labelZoomThreshold"] = label_zoom_threshold;
  return j;
}

void write_map(const BaseMap& map, const BundleConfig& config, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create " + dir.string() + ": " + ec.message());
  write_text(dir / "data.json", serialize_map(map));
  write_text(dir / "config.json", config.to_json().dump(2) + "\n");
  write_text(dir / "index.html", host_page(config));
}

BaseMap read_map(const std::filesystem::path& data_json) { return parse_map(read_text(data_json)); }

namespace {

// Ids carried by one batch URL: the query after "term=", split on "+OR+".
std::vector<std::string> ids_in_url(const std::string& url) {
  auto pos = url.find("term=");
  std::string q = pos == std::string::npos ? url.substr(url.rfind('=') + 1) : url.substr(pos + 5);
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto next = q.find("+OR+", start);
    auto tok = q.substr(start, next == std::string::npos ? std::string::npos : next - start);
    if (tok.size() > 5 && tok.ends_with("[uid]")) tok.resize(tok.size() - 5);
    out.push_back(tok);
    if (next == std::string::npos) break;
    start = next + 4;
  }
  return out;
}

void check_links(const json& node, const std::string& id, std::int64_t count, std::vector<std::string>& errors) {
  const auto& h = node["attributes"]["Get list in PubMed"];
  const std::string where = "node " + id + ": ";
  if (count > static_cast<std::int64_t>(kMaxLinkedPublications)) {
    const std::string expect = "Too many publ. (" + std::to_string(count) + ")";
    if (!h.is_string() || h.get<std::string>() != expect) errors.push_back(where + "expected \"" + expect + "\"");
    return;
  }
  if (!h.is_array()) {
    errors.push_back(where + "expected hyperlink batches for " + std::to_string(count) + " publications");
    return;
  }
  const auto batches = static_cast<std::size_t>((count + 499) / 500);
  if (h.size() != batches) {
    errors.push_back(where + "expected " + std::to_string(batches) + " hyperlinks, found " + std::to_string(h.size()));
    return;
  }
  std::set<std::string> seen;
  for (std::size_t b = 0; b < batches; ++b) {
    const auto lo = b * 500 + 1;
    const auto hi = std::min<std::size_t>(static_cast<std::size_t>(count), (b + 1) * 500);
    const auto label = std::to_string(lo) + "-" + std::to_string(hi);
    if (h[b].value("label", "") != label) errors.push_back(where + "hyperlink " + std::to_string(b + 1) + " should be labeled " + label);
    const auto ids = ids_in_url(h[b].value("url", ""));
    if (ids.size() != hi - lo + 1) {
      errors.push_back(where + "hyperlink " + label + " carries " + std::to_string(ids.size()) + " ids");
    }
    for (const auto& i : ids) {
      if (!seen.insert(i).second) errors.push_back(where + "id " + i + " appears in more than one hyperlink");
    }
  }
}

}  // namespace

ordered_json validate_bundle(const std::filesystem::path& dir) {
  ordered_json report;
  std::vector<std::string> errors;
  ordered_json files = ordered_json::object();
  json data, config;
  std::string page;
  bool have_data = false, have_config = false, have_page = false;
  for (const char* name : {"data.json", "config.json", "index.html"}) {
    const auto path = dir / name;
    if (!std::filesystem::exists(path)) {
      files[name] = "missing";
      errors.push_back(std::string(name) + ": missing");
      continue;
    }
    try {
      const auto text = read_text(path);
      if (std::string_view(name) == "index.html") {
        page = text;
        have_page = true;
      } else {
        (std::string_view(name) == "data.json" ? data : config) = json::parse(text);
        (std::string_view(name) == "data.json" ? have_data : have_config) = true;
      }
      files[name] = "ok";
    } catch (const std::exception& e) {
      files[name] = "unreadable";
      errors.push_back(std::string(name) + ": " + e.what());
    }
  }

  std::size_t node_count = 0, edge_count = 0;
  if (have_data) {
    const auto schema = json::parse(map_data_schema());
    const auto schema_errs = schema_errors(schema, data);
    for (const auto& e : schema_errs) errors.push_back("data.json schema " + e);
    if (schema_errs.empty()) {
      // Subset and cited-by overlays size nodes by their overlay count.
      const auto mode = data["metadata"].contains("overlay") ? data["metadata"]["overlay"].value("mode", "") : "";
      const bool sized_by_overlay = mode == "subset_size" || mode == "cited_by";
      std::map<std::string, std::string> level_of;
      for (const auto& n : data["nodes"]) {
        const auto id = n["id"].get<std::string>();
        if (!level_of.emplace(id, n["attributes"]["Level"].get<std::string>()).second) {
          errors.push_back("node " + id + ": duplicate id");
        }
      }
      for (const auto& n : data["nodes"]) {
        const auto id = n["id"].get<std::string>();
        const auto& a = n["attributes"];
        const auto level = parse_map_level(a["Level"].get<std::string>());
        const auto publ = a["# Publ."].get<std::int64_t>();
        const auto shown = sized_by_overlay && a.contains("overlay_count") ? a["overlay_count"].get<std::int64_t>() : publ;
        const double size = n["size"].get<double>();
        if (std::abs(size - node_size(static_cast<double>(shown), level)) > 5.1e-5) {
          errors.push_back("node " + id + ": size " + n["size"].dump() + " does not match " +
                           std::to_string(shown) + " publications");
        }
        if (n["hidden"].get<bool>() && shown != 0) errors.push_back("node " + id + ": hidden with publications");
        check_links(n, id, publ, errors);
        if (level == MapLevel::kSpecialty) {
          const auto parent = a.value("parent", "");
          const auto it = level_of.find(parent);
          if (parent.empty() || it == level_of.end() || it->second != "Discipline") {
            errors.push_back("node " + id + ": parent discipline '" + parent + "' not present");
          } else if (!id.starts_with(parent + ".")) {
            errors.push_back("node " + id + ": id is not below its parent " + parent);
          }
        }
      }
      for (const auto& e : data["edges"]) {
        for (const char* end : {"source", "target"}) {
          const auto ref = e[end].get<std::string>();
          if (!level_of.contains(ref)) {
            errors.push_back("edge " + e["id"].get<std::string>() + ": " + end + " '" + ref + "' does not exist");
          }
        }
      }
      node_count = data["nodes"].size();
      edge_count = data["edges"].size();
    }
  }
  if (have_config) {
    for (const char* key : {"title", "description", "legend", "gradientStops", "nodeLevelVisibility", "maxZoom", "minZoom"}) {
      if (!config.contains(key)) errors.push_back(std::string("config.json: missing key ") + key);
    }
  }
  if (have_page) {
    for (const char* ref : {"data.json", "config.json"}) {
      if (page.find(ref) == std::string::npos) errors.push_back(std::string("index.html: does not reference ") + ref);
    }
  }
  report["valid"] = errors.empty();
  report["files"] = std::move(files);
  report["errors"] = errors;
  report["nodes"] = node_count;
  report["edges"] = edge_count;
  return report;
}

}  // namespace sciatlas
