#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sciatlas/corpus.hpp"
#include "sciatlas/hierarchy.hpp"
#include "sciatlas/mapbuild.hpp"

namespace sciatlas {

/// gold, bronze, green and hybrid count as open; everything else does not.
bool classify_open_access(OaStatus status);
bool classify_open_access(std::string_view status);

/// Base-map node index of every publication's discipline and specialty.
struct MapMembership {
  std::vector<std::uint32_t> discipline;
  std::vector<std::uint32_t> specialty;
};

MapMembership map_membership(const BaseMap& base, const ClusterTree& tree);

struct GradientStop {
  double position = 0;  // in [0, 1]
  int r = 0, g = 0, b = 0;

  bool operator==(const GradientStop&) const = default;
};

struct Gradient {
  std::vector<GradientStop> stops;  // ascending positions

  /// Dark purple at 0, green at 0.3, yellow at 1.
  static Gradient standard();
  /// Linear interpolation between the enclosing stops, alpha 0.5. t is
  /// clamped to [0, 1].
  std::string at(double t) const;
};

inline constexpr std::string_view kNeutralColor = "rgba(200,200,200,0.5)";

/// Sizes recomputed from the subset members per node; empty nodes are hidden
/// but keep their coordinates.
BaseMap project_subset(const BaseMap& base, const MapMembership& membership,
                       std::span<const std::uint32_t> subset);

enum class DenominatorRule {
  kAllMembers,     // publications without a value count as 0
  kWithValueOnly,  // publications without a value are left out
};

/// Per publication value, or nullopt when the publication has none.
using MetricValues = std::vector<std::optional<double>>;

/// 1 for open, 0 for not open. Unknown status is 0, or no value when
/// unknown_has_value is false.
MetricValues open_access_metric(const Corpus& corpus, bool unknown_has_value = true);

MetricValues metric_from_file(const MetricFile& file, std::size_t publication_count);

struct MetricRange {
  double lo = 0;
  double hi = 1;
};

/// overlay_value is the mean over the node's publications; the color is the
/// gradient at the value normalized to the range. Nodes with an empty
/// denominator get the neutral color.
BaseMap color_by_metric(const BaseMap& base, const MapMembership& membership, const MetricValues& metric,
                        const Gradient& gradient, DenominatorRule rule, MetricRange range = {});

struct CitedByOptions {
  std::optional<int> max_cited_year;  // cited publications after this year are ignored
  Gradient gradient = Gradient::standard();
};

/// Size from the distinct publications cited by the focal set, value the
/// number of citation links per cited publication, colored over [1, max].
BaseMap cited_by_overlay(const BaseMap& base, const MapMembership& membership, const Corpus& corpus,
                         std::span<const std::uint32_t> focal, const CitedByOptions& options = {});

}  // namespace sciatlas
