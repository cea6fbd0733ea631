#include <algorithm>
#include <cmath>
#include <map>

#include "../support/fixtures.hpp"
#include "doctest.h"
#include "sciatlas/labeler.hpp"
#include "sciatlas/util.hpp"

using namespace sciatlas;

namespace {

std::vector<std::string> top_terms(const ClusterLabel& l) {
  auto out = split(l.label, ';');
  for (auto& s : out) s = std::string(trim(s));
  out.insert(out.end(), l.additional_terms.begin(), l.additional_terms.end());
  return out;
}

struct Table {
  std::vector<std::string> vocab;
  TermStats stats;
};

// One cluster of interest (id 0) and a background cluster.
Table random_table(std::mt19937_64& rng) {
  Table t;
  const std::size_t terms = 12 + rng() % 20;
  t.stats.per_cluster.resize(2);
  for (std::uint32_t i = 0; i < terms; ++i) {
    t.vocab.push_back("term" + std::to_string(1000 + rng() % 9000) + "x" + std::to_string(i));
    const std::uint64_t in = 1 + rng() % 12;
    const std::uint64_t out = rng() % 30;
    t.stats.total.push_back(in + out);
    t.stats.per_cluster[0].emplace_back(i, in);
    if (out) t.stats.per_cluster[1].emplace_back(i, out);
  }
  return t;
}

}  // namespace

TEST_CASE("tfs spot values") {
  CHECK(std::abs(tfs_score(8, 10, 0.5) - std::sqrt(6.4)) < 1e-9);
  CHECK(tfs_score(8, 10, 1.0) == 8.0);
  CHECK(tfs_score(8, 10, 0.0) == doctest::Approx(0.8));
  CHECK(tfs_score(0, 10, 0.5) == 0.0);
  CHECK_THROWS(tfs_score(11, 10, 0.5));
  CHECK_THROWS(tfs_score(1, 10, 1.5));
}

TEST_CASE("alpha one ranks by frequency, alpha zero by specificity") {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 100; ++round) {
    const auto t = random_table(rng);
    std::vector<std::uint32_t> ids;
    for (const auto& [id, tf] : t.stats.per_cluster[0]) ids.push_back(id);
    auto tf = [&](std::uint32_t i) { return t.stats.per_cluster[0][i].second; };

    auto by_freq = ids;
    std::sort(by_freq.begin(), by_freq.end(), [&](auto a, auto b) {
      if (tf(a) != tf(b)) return tf(a) > tf(b);
      return t.vocab[a] < t.vocab[b];
    });
    auto by_spec = ids;
    // Exact rational comparison of tf/total.
    std::sort(by_spec.begin(), by_spec.end(), [&](auto a, auto b) {
      const auto lhs = tf(a) * t.stats.total[b], rhs = tf(b) * t.stats.total[a];
      if (lhs != rhs) return lhs > rhs;
      if (tf(a) != tf(b)) return tf(a) > tf(b);
      return t.vocab[a] < t.vocab[b];
    });
    auto names = [&](const std::vector<std::uint32_t>& order) {
      std::vector<std::string> out;
      for (std::size_t i = 0; i < order.size() && i < 10; ++i) out.push_back(t.vocab[order[i]]);
      return out;
    };
    CHECK(top_terms(label_cluster(0, t.stats, t.vocab, 1.0, 1, {}, "1")) == names(by_freq));
    CHECK(top_terms(label_cluster(0, t.stats, t.vocab, 0.0, 1, {}, "1")) == names(by_spec));
  }
}

TEST_CASE("labels take three terms and seven additional ones") {
  std::mt19937_64 rng(32);
  auto t = random_table(rng);
  while (t.vocab.size() < 15) t = random_table(rng);
  const auto l = label_cluster(0, t.stats, t.vocab, 0.5, 1, {}, "1");
  CHECK(split(l.label, ';').size() == 3);
  CHECK(l.additional_terms.size() == 7);
}

TEST_CASE("min_tf and the stoplist filter candidates") {
  TermStats s;
  s.total = {5, 5, 1, 4};
  s.per_cluster = {{{0, 5}, {1, 5}, {2, 1}, {3, 4}}};
  const std::vector<std::string> vocab = {"melanoma", "clinical study", "rare term", "skin"};
  const auto l = label_cluster(0, s, vocab, 0.5, 2, {"study"}, "1.2");
  CHECK(l.label == "melanoma; skin");
  CHECK(l.additional_terms.empty());
  const auto none = label_cluster(0, s, vocab, 0.5, 10, {}, "1.2");
  CHECK(none.label == "(unlabeled) 1.2");
  CHECK(stoplisted("clinical study", {"study"}));
  CHECK_FALSE(stoplisted("study design", {"study"}));
}

TEST_CASE("tagging and lemmatization") {
  CHECK(tag_word("malignant") == PosTag::kAdjective);
  CHECK(tag_word("melanoma") == PosTag::kNoun);
  CHECK(tag_word("in") == PosTag::kOther);
  CHECK(lemmatize_noun("mice") == "mouse");
  CHECK(lemmatize_noun("tumors") == "tumor");
  CHECK(lemmatize_noun("studies") == "study");
  CHECK(lemmatize_noun("analysis") == "analysis");
  CHECK(from_penn_tag("NNS") == PosTag::kNoun);
  CHECK(from_penn_tag("JJR") == PosTag::kAdjective);
  CHECK(from_penn_tag("VBZ") == PosTag::kOther);
}

TEST_CASE("noun phrases end in a noun and never cross punctuation") {
  const auto p = extract_noun_phrases("Malignant melanoma cells in mice: skin tumors, treatment");
  const std::set<std::string> got(p.begin(), p.end());
  CHECK(got.contains("malignant melanoma cell"));
  CHECK(got.contains("melanoma cell"));
  CHECK(got.contains("cell"));
  CHECK(got.contains("mouse"));
  CHECK(got.contains("skin tumor"));
  CHECK_FALSE(got.contains("mouse skin"));
  CHECK_FALSE(got.contains("malignant"));
  for (const auto& s : extract_noun_phrases("a b c d e f g h", 4)) CHECK(split(s, ' ').size() <= 4);
}

TEST_CASE("term statistics match a brute-force count") {
  std::mt19937_64 rng(33);
  PublicationTerms terms;
  for (int i = 0; i < 20; ++i) terms.vocabulary.push_back("t" + std::to_string(i));
  const std::size_t pubs = 80;
  terms.occurrences.resize(pubs);
  std::vector<std::uint32_t> assign(pubs);
  for (std::size_t p = 0; p < pubs; ++p) {
    assign[p] = static_cast<std::uint32_t>(rng() % 4);
    for (auto& field : terms.occurrences[p]) {
      const auto k = rng() % 5;
      for (std::uint64_t j = 0; j < k; ++j) field.push_back(static_cast<std::uint32_t>(rng() % 20));
    }
  }
  const std::vector<TextField> fields = {TextField::kTitle, TextField::kJournalTitle};
  const auto stats = compute_term_stats(terms, assign, 4, fields);
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint64_t> per;
  std::vector<std::uint64_t> total(20, 0);
  for (std::size_t p = 0; p < pubs; ++p) {
    for (auto f : fields) {
      for (auto t : terms.occurrences[p][static_cast<std::size_t>(f)]) {
        ++per[{assign[p], t}];
        ++total[t];
      }
    }
  }
  for (std::uint32_t t = 0; t < 20; ++t) CHECK(stats.total[t] == total[t]);
  std::size_t entries = 0;
  for (std::uint32_t c = 0; c < 4; ++c) {
    for (const auto& [t, n] : stats.per_cluster[c]) {
      CHECK(per.at({c, t}) == n);
      ++entries;
    }
    CHECK(std::is_sorted(stats.per_cluster[c].begin(), stats.per_cluster[c].end()));
  }
  CHECK(entries == per.size());
}

TEST_CASE("label files round trip") {
  std::mt19937_64 rng(34);
  const auto tree = testkit::random_tree(30, 6, 4, 2, 1, rng);
  LabelSet labels;
  for (const auto& lvl : tree.levels()) {
    auto& v = labels[lvl.spec.name];
    for (std::uint32_t c = 0; c < lvl.cluster_count(); ++c) {
      v.push_back({"a" + std::to_string(c) + "; b; c", {"d", "e f"}});
    }
  }
  testkit::TempDir dir("labels");
  write_labels(dir / "labels.tsv", tree, labels);
  CHECK(read_labels(dir / "labels.tsv", tree) == labels);
}
