#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace sciatlas {

enum class PubType { kArticle, kReview };

enum class OaStatus { kGold, kBronze, kGreen, kHybrid, kClosed, kUnknown };

std::string_view to_string(PubType t);
std::string_view to_string(OaStatus s);
std::optional<PubType> parse_pub_type(std::string_view s);
std::optional<OaStatus> parse_oa_status(std::string_view s);

struct PublicationRecord {
  std::string pub_id;
  int year = 0;
  std::string title;
  std::string journal_title;
  std::vector<std::string> mesh_terms;
  std::vector<std::string> author_addresses;
  PubType pub_type = PubType::kArticle;
  OaStatus oa_status = OaStatus::kUnknown;

  bool operator==(const PublicationRecord&) const = default;
};

/// Directed citation between two loaded publications, by corpus index.
struct CitationEdge {
  std::uint32_t citing = 0;
  std::uint32_t cited = 0;

  auto operator<=>(const CitationEdge&) const = default;
};

struct YearRange {
  int first = 1995;
  int last = 9999;
  bool contains(int y) const { return y >= first && y <= last; }
};

enum class ParseMode { kLenient, kStrict };

struct PublicationLoadReport {
  std::size_t lines = 0;
  std::size_t loaded = 0;
  std::size_t skipped_year = 0;
  std::size_t skipped_type = 0;
  std::size_t malformed = 0;
  std::size_t duplicate_ids = 0;
  std::vector<std::string> warnings;  // first few, with line numbers
};

struct CitationLoadReport {
  std::size_t rows = 0;
  std::size_t kept = 0;
  std::size_t self_loops = 0;
  std::size_t duplicates = 0;
  std::size_t dangling = 0;
  std::size_t malformed = 0;
  std::vector<std::string> warnings;
};

/// Publications plus the citations among them. Immutable once loaded.
class Corpus {
 public:
  Corpus() = default;

  /// Adds a record; returns false when the id is already present.
  bool add(PublicationRecord rec);

  /// Replaces the citation list. Self-loops, duplicates and out-of-range
  /// endpoints are removed; the result is sorted.
  void set_citations(std::vector<CitationEdge> edges);

  std::size_t size() const { return pubs_.size(); }
  const std::vector<PublicationRecord>& publications() const { return pubs_; }
  const PublicationRecord& operator[](std::uint32_t i) const { return pubs_[i]; }
  const std::vector<CitationEdge>& citations() const { return citations_; }

  std::optional<std::uint32_t> find(std::string_view pub_id) const;

  bool operator==(const Corpus& o) const { return pubs_ == o.pubs_ && citations_ == o.citations_; }

 private:
  std::vector<PublicationRecord> pubs_;
  std::unordered_map<std::string, std::uint32_t> index_;
  std::vector<CitationEdge> citations_;
};

PublicationRecord parse_publication_json(std::string_view line);
std::string publication_to_json(const PublicationRecord& rec);

/// Loads publications.jsonl. Only articles and reviews inside the optional
/// year window are kept.
Corpus load_publications(const std::filesystem::path& path,
                         std::optional<YearRange> year_filter = std::nullopt,
                         ParseMode mode = ParseMode::kLenient,
                         PublicationLoadReport* report = nullptr);

/// Loads citations.tsv (`citing<TAB>cited`) into the corpus. Edges with an
/// endpoint outside the corpus, self-citations and repeated pairs are dropped.
void load_citations(const std::filesystem::path& path, Corpus& corpus,
                    ParseMode mode = ParseMode::kLenient,
                    CitationLoadReport* report = nullptr);

struct Subset {
  std::vector<std::uint32_t> members;  // sorted, unique corpus indices
  std::size_t unknown = 0;
};

/// Loads subset.txt (one pub_id per line) and intersects it with the corpus.
Subset load_subset(const std::filesystem::path& path, const Corpus& corpus);

/// Loads a `pub_id<TAB>value` metric file. Values are reals; true/false map
/// to 1/0. Unknown ids are counted and skipped.
struct MetricFile {
  std::unordered_map<std::uint32_t, double> values;
  std::size_t unknown = 0;
};
MetricFile load_metric(const std::filesystem::path& path, const Corpus& corpus);

void write_publications(const std::filesystem::path& path, const Corpus& corpus);
void write_citations(const std::filesystem::path& path, const Corpus& corpus);

}  // namespace sciatlas
