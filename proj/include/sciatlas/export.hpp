#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sciatlas/mapbuild.hpp"
#include "sciatlas/overlay.hpp"

namespace sciatlas {

/// Coordinates and sizes are written rounded to this many decimals.
inline constexpr int kCoordinateDecimals = 4;

double round_coordinate(double v);

nlohmann::ordered_json map_to_json(const BaseMap& map);
BaseMap map_from_json(const nlohmann::ordered_json& j);

/// data.json text: two-space indent, trailing newline.
std::string serialize_map(const BaseMap& map);
BaseMap parse_map(std::string_view text);

struct LegendEntry {
  std::string label;
  std::string color;
};

struct BundleConfig {
  std::string title = "Base map";
  std::string description;
  std::vector<LegendEntry> legend;
  std::vector<GradientStop> gradient_stops = Gradient::standard().stops;
  bool show_disciplines = true;
  bool show_specialties = true;
  double max_zoom = 20;
  double min_zoom = 0.05;
  double label_zoom_threshold = 2;

  nlohmann::ordered_json to_json() const;
};

/// Writes data.json, config.json and index.html into dir. The page embeds no
/// data; it loads both JSON files at runtime through the viewer script.
void write_map(const BaseMap& map, const BundleConfig& config, const std::filesystem::path& dir);

BaseMap read_map(const std::filesystem::path& data_json);

/// Machine-readable bundle check:
///   {"valid": bool, "files": {...}, "errors": [...], "nodes": n, "edges": m}
nlohmann::ordered_json validate_bundle(const std::filesystem::path& dir);

/// The published JSON schema for data.json.
std::string_view map_data_schema();

}  // namespace sciatlas
