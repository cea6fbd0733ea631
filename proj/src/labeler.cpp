#include "sciatlas/labeler.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"
#include "sciatlas/util.hpp"

namespace sciatlas {

double tfs_score(std::uint64_t tf_c, std::uint64_t tf_total, double alpha) {
  if (tf_c == 0) return 0.0;
  if (tf_total < tf_c) throw Error("tf_c exceeds tf_total");
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error("alpha must lie in [0, 1]");
  const double f = static_cast<double>(tf_c);
  const double spec = f / static_cast<double>(tf_total);
  return std::pow(f, alpha) * std::pow(spec, 1.0 - alpha);
}

std::string_view to_string(TextField f) {
  switch (f) {
    case TextField::kTitle: return "title";
    case TextField::kMeshTerms: return "mesh_terms";
    case TextField::kJournalTitle: return "journal_title";
    case TextField::kAuthorAddresses: break;
  }
  return "author_addresses";
}

TextField parse_text_field(std::string_view s) {
  for (auto f : {TextField::kTitle, TextField::kMeshTerms, TextField::kJournalTitle,
                 TextField::kAuthorAddresses}) {
    if (s == to_string(f)) return f;
  }
  throw InputError("unknown label field '" + std::string(s) + "'");
}

LabelConfig LabelConfig::defaults() {
  LabelConfig c;
  c.levels["topic"] = {{TextField::kTitle, TextField::kMeshTerms}, 0.33};
  c.levels["specialty"] = {{TextField::kTitle, TextField::kMeshTerms, TextField::kJournalTitle}, 0.5};
  c.levels["discipline"] = {{TextField::kJournalTitle, TextField::kAuthorAddresses}, 0.67};
  c.stoplist = default_stoplist();
  return c;
}

std::set<std::string> default_stoplist() {
  return {
      "study",      "analysis",   "patient",    "result",     "effect",     "case",
      "method",     "role",       "use",        "report",     "review",     "association",
      "evaluation", "comparison", "approach",   "factor",     "outcome",    "year",
      "group",      "level",      "department", "university", "institute",  "school",
      "center",     "centre",     "hospital",   "faculty",    "division",   "laboratory",
      "journal",    "research",   "science",    "humans",     "human",      "male",
      "female",     "adult",      "aged",       "middle aged", "animal",    "new",
      "impact",     "development", "treatment", "risk",       "time",       "data",
      "letter",     "annal",      "bulletin",   "proceeding", "society",    "archive",
  };
}

std::set<std::string> load_stoplist(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    std::string term(t);
    std::transform(term.begin(), term.end(), term.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    out.insert(std::move(term));
  }
  return out;
}

namespace {

std::vector<TaggedSegment> parse_segments(const nlohmann::json& field, std::string_view where) {
  if (!field.is_array()) throw InputError(std::string(where) + ": field is not a list of segments");
  std::vector<TaggedSegment> out;
  for (const auto& seg : field) {
    if (!seg.is_array()) throw InputError(std::string(where) + ": segment is not a list");
    TaggedSegment s;
    for (const auto& tok : seg) {
      if (!tok.is_array() || tok.size() < 2 || !tok[0].is_string() || !tok[1].is_string()) {
        throw InputError(std::string(where) + ": token must be [text, tag] or [text, tag, lemma]");
      }
      TaggedToken t;
      t.text = tok[0].get<std::string>();
      std::transform(t.text.begin(), t.text.end(), t.text.begin(),
                     [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
      const auto tag = tok[1].get<std::string>();
      t.tag = from_penn_tag(tag);
      if (t.tag == PosTag::kNoun) {
        if (tok.size() > 2 && tok[2].is_string()) {
          t.lemma = tok[2].get<std::string>();
          std::transform(t.lemma.begin(), t.lemma.end(), t.lemma.begin(),
                         [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
        } else {
          t.lemma = (tag == "NNS" || tag == "NNPS") ? lemmatize_noun(t.text) : t.text;
        }
      }
      s.push_back(std::move(t));
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TaggedSegment> tag_field(const PublicationRecord& p, TextField f) {
  switch (f) {
    case TextField::kTitle: return tag_text(p.title);
    case TextField::kJournalTitle: return tag_text(p.journal_title);
    case TextField::kMeshTerms:
    case TextField::kAuthorAddresses: {
      const auto& list = f == TextField::kMeshTerms ? p.mesh_terms : p.author_addresses;
      std::vector<TaggedSegment> out;
      for (const auto& item : list) {
        for (auto& seg : tag_text(item)) out.push_back(std::move(seg));
      }
      return out;
    }
  }
  return {};
}

}  // namespace

PretaggedCorpus load_pretagged(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  PretaggedCorpus out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const std::string where = path.string() + ":" + std::to_string(lineno);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(where + ": " + e.what());
    }
    if (!j.contains("pub_id") || !j["pub_id"].is_string() || !j.contains("fields") ||
        !j["fields"].is_object()) {
      throw InputError(where + ": expected {\"pub_id\": ..., \"fields\": {...}}");
    }
    auto& entry = out[j["pub_id"].get<std::string>()];
    for (const auto& [name, value] : j["fields"].items()) {
      const auto f = parse_text_field(name);
      entry[static_cast<std::size_t>(f)] = parse_segments(value, where);
    }
  }
  return out;
}

PublicationTerms extract_terms(const Corpus& corpus, std::size_t max_phrase_length, int threads,
                               const PretaggedCorpus* pretagged) {
  const auto n = corpus.size();
  std::vector<std::array<std::vector<std::string>, kTextFieldCount>> phrases(n);
  parallel_for(n, threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& pub = corpus[static_cast<std::uint32_t>(i)];
      const std::array<std::vector<TaggedSegment>, kTextFieldCount>* pre = nullptr;
      if (pretagged) {
        if (const auto it = pretagged->find(pub.pub_id); it != pretagged->end()) pre = &it->second;
      }
      for (std::size_t f = 0; f < kTextFieldCount; ++f) {
        const auto segs = pre ? (*pre)[f] : tag_field(pub, static_cast<TextField>(f));
        phrases[i][f] = phrases_from_segments(segs, max_phrase_length);
      }
    }
  });

  PublicationTerms out;
  out.occurrences.resize(n);
  std::unordered_map<std::string, std::uint32_t> ids;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t f = 0; f < kTextFieldCount; ++f) {
      auto& occ = out.occurrences[i][f];
      occ.reserve(phrases[i][f].size());
      for (auto& ph : phrases[i][f]) {
        const auto [it, inserted] = ids.emplace(ph, static_cast<std::uint32_t>(out.vocabulary.size()));
        if (inserted) out.vocabulary.push_back(std::move(ph));
        occ.push_back(it->second);
      }
    }
  }
  return out;
}

TermStats compute_term_stats(const PublicationTerms& terms, const std::vector<std::uint32_t>& assignment,
                             std::size_t cluster_count, const std::vector<TextField>& fields) {
  if (assignment.size() != terms.occurrences.size()) throw Error("assignment does not match term table");
  TermStats st;
  st.total.assign(terms.vocabulary.size(), 0);
  std::vector<std::vector<std::uint32_t>> raw(cluster_count);
  for (std::size_t i = 0; i < assignment.size(); ++i) {
    auto& bucket = raw.at(assignment[i]);
    for (auto f : fields) {
      for (auto t : terms.occurrences[i][static_cast<std::size_t>(f)]) {
        ++st.total[t];
        bucket.push_back(t);
      }
    }
  }
  st.per_cluster.resize(cluster_count);
  for (std::size_t c = 0; c < cluster_count; ++c) {
    auto& b = raw[c];
    std::sort(b.begin(), b.end());
    auto& out = st.per_cluster[c];
    for (std::size_t i = 0; i < b.size();) {
      std::size_t j = i;
      while (j < b.size() && b[j] == b[i]) ++j;
      out.emplace_back(b[i], j - i);
      i = j;
    }
  }
  return st;
}

bool stoplisted(std::string_view term, const std::set<std::string>& stoplist) {
  if (stoplist.contains(std::string(term))) return true;
  const auto space = term.rfind(' ');
  return space != std::string_view::npos && stoplist.contains(std::string(term.substr(space + 1)));
}

ClusterLabel label_cluster(std::uint32_t cluster, const TermStats& stats,
                           const std::vector<std::string>& vocabulary, double alpha,
                           std::uint64_t min_tf, const std::set<std::string>& stoplist,
                           std::string_view cluster_path) {
  struct Ranked {
    double score;
    std::uint64_t tf;
    const std::string* term;
  };
  std::vector<Ranked> ranked;
  for (const auto& [t, tf] : stats.per_cluster.at(cluster)) {
    if (tf < min_tf || stoplisted(vocabulary[t], stoplist)) continue;
    ranked.push_back({tfs_score(tf, stats.total[t], alpha), tf, &vocabulary[t]});
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& a, const Ranked& b) {
    if (a.score != b.score) return a.score > b.score;
    if (a.tf != b.tf) return a.tf > b.tf;
    return *a.term < *b.term;
  });
  ClusterLabel out;
  if (ranked.empty()) {
    out.label = "(unlabeled) " + std::string(cluster_path);
    return out;
  }
  for (std::size_t i = 0; i < ranked.size() && i < 3; ++i) {
    if (i > 0) out.label += "; ";
    out.label += *ranked[i].term;
  }
  for (std::size_t i = 3; i < ranked.size() && i < 10; ++i) out.additional_terms.push_back(*ranked[i].term);
  return out;
}

LabelSet label_tree(const ClusterTree& tree, const PublicationTerms& terms, const LabelConfig& config) {
  LabelSet out;
  for (const auto& [name, lc] : config.levels) {
    if (!(lc.alpha >= 0.0 && lc.alpha <= 1.0)) throw Error("alpha for level '" + name + "' outside [0, 1]");
    const auto li = tree.find_level(name);
    if (!li) continue;
    const auto& lvl = tree.level(*li);
    const auto stats =
        compute_term_stats(terms, tree.publication_assignment(*li), lvl.cluster_count(), lc.fields);
    auto& labels = out[name];
    labels.reserve(lvl.cluster_count());
    for (std::uint32_t c = 0; c < lvl.cluster_count(); ++c) {
      labels.push_back(label_cluster(c, stats, terms.vocabulary, lc.alpha, config.min_tf,
                                     config.stoplist, lvl.paths[c]));
    }
  }
  return out;
}

void write_labels(const std::filesystem::path& path, const ClusterTree& tree, const LabelSet& labels) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& lvl : tree.levels()) {
    const auto it = labels.find(lvl.spec.name);
    if (it == labels.end()) continue;
    for (std::uint32_t c = 0; c < lvl.cluster_count(); ++c) {
      const auto& l = it->second.at(c);
      out << lvl.paths[c] << '\t' << lvl.spec.name << '\t' << l.label << '\t';
      for (std::size_t i = 0; i < l.additional_terms.size(); ++i) {
        if (i > 0) out << "; ";
        out << l.additional_terms[i];
      }
      out << '\n';
    }
  }
  if (!out) throw Error("write failed: " + path.string());
}

LabelSet read_labels(const std::filesystem::path& path, const ClusterTree& tree) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::map<std::string, std::map<std::string, ClusterLabel>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 4) throw InputError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    ClusterLabel l;
    l.label = cols[2];
    if (!cols[3].empty()) {
      for (auto& t : split(cols[3], ';')) l.additional_terms.emplace_back(trim(t));
    }
    rows[cols[1]][cols[0]] = std::move(l);
  }
  LabelSet out;
  for (const auto& [level, by_path] : rows) {
    const auto li = tree.find_level(level);
    if (!li) throw InputError(path.string() + ": unknown level '" + level + "'");
    const auto& lvl = tree.level(*li);
    auto& labels = out[level];
    for (std::uint32_t c = 0; c < lvl.cluster_count(); ++c) {
      const auto it = by_path.find(lvl.paths[c]);
      if (it == by_path.end()) throw InputError(path.string() + ": no label for cluster " + lvl.paths[c]);
      labels.push_back(it->second);
    }
  }
  return out;
}

}  // namespace sciatlas
