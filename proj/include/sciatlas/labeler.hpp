#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "sciatlas/corpus.hpp"
#include "sciatlas/hierarchy.hpp"

namespace sciatlas {

enum class PosTag { kNoun, kAdjective, kOther };

struct TaggedToken {
  std::string text;   // lowercased surface form
  PosTag tag = PosTag::kOther;
  std::string lemma;  // set for nouns
};

/// Tokens between punctuation breaks. Phrases never cross segments.
using TaggedSegment = std::vector<TaggedToken>;

/// Lexicon plus suffix heuristics. Unknown alphabetic words are nouns.
PosTag tag_word(std::string_view lower_word);

/// Rule-based singularization of a lowercased noun.
std::string lemmatize_noun(std::string_view lower_word);

std::vector<TaggedSegment> tag_text(std::string_view text);

/// Every maximal adjective*-noun+ span and each of its noun-final sub-spans
/// of at most max_length tokens, nouns lemmatized, in order of appearance.
std::vector<std::string> phrases_from_segments(const std::vector<TaggedSegment>& segments,
                                               std::size_t max_length = 4);

std::vector<std::string> extract_noun_phrases(std::string_view text, std::size_t max_length = 4);

/// Maps a Penn Treebank tag (NN*, JJ*, ...) to the tagger's classes.
PosTag from_penn_tag(std::string_view tag);

/// tf_c^alpha * (tf_c / tf_total)^(1 - alpha). Zero when tf_c is zero.
double tfs_score(std::uint64_t tf_c, std::uint64_t tf_total, double alpha);

enum class TextField { kTitle, kMeshTerms, kJournalTitle, kAuthorAddresses };
inline constexpr std::size_t kTextFieldCount = 4;

std::string_view to_string(TextField f);
TextField parse_text_field(std::string_view s);

struct LevelLabelConfig {
  std::vector<TextField> fields;
  double alpha = 0.5;
};

struct LabelConfig {
  std::map<std::string, LevelLabelConfig> levels;
  std::uint64_t min_tf = 2;
  std::size_t max_phrase_length = 4;
  std::set<std::string> stoplist;

  /// topic: titles + MeSH, alpha 0.33; specialty: titles + MeSH + journal
  /// titles, alpha 0.5; discipline: journal titles + addresses, alpha 0.67.
  static LabelConfig defaults();
};

std::set<std::string> default_stoplist();
std::set<std::string> load_stoplist(const std::filesystem::path& path);

/// Term occurrences of every publication, per field, as interned ids.
struct PublicationTerms {
  std::vector<std::string> vocabulary;
  /// [publication][field] -> term ids (with repetition).
  std::vector<std::array<std::vector<std::uint32_t>, kTextFieldCount>> occurrences;
};

/// Pre-tagged token streams keyed by pub_id; see load_pretagged.
using PretaggedCorpus =
    std::unordered_map<std::string, std::array<std::vector<TaggedSegment>, kTextFieldCount>>;

/// JSONL, one object per publication:
///   {"pub_id": "...", "fields": {"title": [[["malignant","JJ"],["melanoma","NN"]]], ...}}
/// Each field holds a list of segments; a token is [text, tag] or
/// [text, tag, lemma].
PretaggedCorpus load_pretagged(const std::filesystem::path& path);

PublicationTerms extract_terms(const Corpus& corpus, std::size_t max_phrase_length, int threads = 1,
                               const PretaggedCorpus* pretagged = nullptr);

/// Per-cluster and corpus-wide term frequencies over a set of fields.
struct TermStats {
  std::vector<std::uint64_t> total;  // by term id
  std::vector<std::vector<std::pair<std::uint32_t, std::uint64_t>>> per_cluster;  // sorted by term id
};

TermStats compute_term_stats(const PublicationTerms& terms, const std::vector<std::uint32_t>& assignment,
                             std::size_t cluster_count, const std::vector<TextField>& fields);

struct ClusterLabel {
  std::string label;
  std::vector<std::string> additional_terms;

  bool operator==(const ClusterLabel&) const = default;
};

/// A term is stoplisted when it, or its head noun, is on the list.
bool stoplisted(std::string_view term, const std::set<std::string>& stoplist);

/// Ranks the cluster's terms by TFS (ties: higher tf_c, then alphabetical),
/// skipping stoplisted terms and terms below min_tf. The top three form the
/// label, the next seven the additional terms.
ClusterLabel label_cluster(std::uint32_t cluster, const TermStats& stats,
                           const std::vector<std::string>& vocabulary, double alpha,
                           std::uint64_t min_tf, const std::set<std::string>& stoplist,
                           std::string_view cluster_path);

/// Labels by level name, indexed by cluster id.
using LabelSet = std::map<std::string, std::vector<ClusterLabel>>;

LabelSet label_tree(const ClusterTree& tree, const PublicationTerms& terms, const LabelConfig& config);

/// labels.tsv: `cluster_path<TAB>level<TAB>label<TAB>additional terms joined by "; "`.
void write_labels(const std::filesystem::path& path, const ClusterTree& tree, const LabelSet& labels);
LabelSet read_labels(const std::filesystem::path& path, const ClusterTree& tree);

}  // namespace sciatlas
