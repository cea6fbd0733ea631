#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "sciatlas/corpus.hpp"
#include "sciatlas/export.hpp"
#include "sciatlas/hierarchy.hpp"
#include "sciatlas/labeler.hpp"
#include "sciatlas/layout.hpp"
#include "sciatlas/mapbuild.hpp"
#include "sciatlas/overlay.hpp"

namespace sciatlas {

enum class OverlayMode { kSubsetSize, kMetricColor, kCitedBy };

std::string_view to_string(OverlayMode m);
OverlayMode parse_overlay_mode(std::string_view s);

struct OverlayRequest {
  std::string name;  // bundle directory under <output_dir>/overlays
  OverlayMode mode = OverlayMode::kSubsetSize;
  /// subset_size: the subset; cited_by: the focal set.
  std::optional<std::filesystem::path> subset;
  /// metric_color: `pub_id<TAB>value`; without it the corpus oa_status is used.
  std::optional<std::filesystem::path> metric;
  DenominatorRule denominator = DenominatorRule::kAllMembers;
  MetricRange range;
  std::optional<int> max_cited_year;
  std::string title;
};

struct PipelineConfig {
  std::filesystem::path publications;
  std::filesystem::path citations;
  std::filesystem::path output_dir;
  std::optional<std::filesystem::path> pretagged;
  std::optional<std::filesystem::path> stoplist;
  YearRange years;
  ParseMode parse_mode = ParseMode::kLenient;
  std::vector<LevelSpec> levels = default_level_specs();
  int max_iterations = 100;
  LabelConfig labels = LabelConfig::defaults();
  HierarchyLayoutOptions layout;
  MapBuildOptions map;
  BundleConfig bundle;
  bool unknown_oa_has_value = true;
  std::vector<OverlayRequest> overlays;
  std::uint64_t seed = 42;
  int threads = 1;
};

/// Relative paths resolve against base_dir. Unknown keys are errors; a
/// missing publications, citations or output_dir names the key.
PipelineConfig parse_config(const nlohmann::ordered_json& j, const std::filesystem::path& base_dir);

/// Sets a dotted key ("layout.sibling_factor=2"). The value is parsed as
/// JSON when possible and taken as a string otherwise.
void apply_override(nlohmann::ordered_json& j, std::string_view assignment);

nlohmann::ordered_json read_config_json(const std::filesystem::path& file);

PipelineConfig load_config(const std::filesystem::path& file, const std::vector<std::string>& overrides = {});

enum class Stage { kIngest, kCluster, kLabel, kLayout, kBuild, kExport };
inline constexpr Stage kAllStages[] = {Stage::kIngest, Stage::kCluster, Stage::kLabel,
                                       Stage::kLayout, Stage::kBuild,   Stage::kExport};

std::string_view to_string(Stage s);

struct WorkPaths {
  std::filesystem::path work;
  std::filesystem::path corpus;     // corpus.jsonl
  std::filesystem::path citations;  // citations.tsv
  std::filesystem::path tree;       // tree/
  std::filesystem::path labels;     // labels.tsv
  std::filesystem::path positions;  // positions.tsv
  std::filesystem::path basemap;    // basemap.json
  std::filesystem::path bundle;
  std::filesystem::path overlays;

  static WorkPaths of(const PipelineConfig& config);
  std::filesystem::path stamp(Stage s) const;
  std::filesystem::path checkpoint(Stage s) const;
};

/// Hash of everything a stage's output depends on, chained through the
/// stages before it. Thread count is excluded: it never changes results.
std::string stage_hash(const PipelineConfig& config, Stage stage);

struct RunOptions {
  bool force = false;  // accept stale checkpoints
  std::ostream* log = nullptr;
};

void run_stage(Stage stage, const PipelineConfig& config, const RunOptions& options = {});
void run_overlay(const PipelineConfig& config, const OverlayRequest& request, const RunOptions& options = {});
/// Every stage, then every configured overlay.
void run_all(const PipelineConfig& config, const RunOptions& options = {});

/// Config sections as JSON, defaults included. Used for hashing and echoed
/// into the bundle metadata.
nlohmann::ordered_json levels_to_json(const std::vector<LevelSpec>& levels);
nlohmann::ordered_json layout_params_to_json(const LayoutParams& p);

void write_positions(const std::filesystem::path& path, const ClusterTree& tree, const HierarchyLayout& layout);
void read_positions(const std::filesystem::path& path, const ClusterTree& tree, HierarchyLayout& layout);

}  // namespace sciatlas
