#include "sciatlas/synth.hpp"

#include <cctype>
#include <fstream>
#include <set>

#include "sciatlas/labeler.hpp"
#include "sciatlas/util.hpp"

namespace sciatlas {
namespace {

class WordMaker {
 public:
  explicit WordMaker(Rng& rng) : rng_(rng) {}

  std::string noun() {
    static constexpr std::string_view onsets[] = {"b", "c", "d", "f", "g", "k", "l", "m", "n", "p",
                                                  "r", "t", "v", "z", "br", "cr", "pl", "tr", "st"};
    static constexpr std::string_view vowels[] = {"a", "e", "i", "o", "u"};
    static constexpr std::string_view endings[] = {"in", "ase", "oma", "ite", "on", "um", "ene", "ide", "ol", "an"};
    while (true) {
      std::string w;
      const auto syllables = 1 + rng_.below(2);
      for (std::uint64_t s = 0; s <= syllables; ++s) {
        w += onsets[rng_.below(std::size(onsets))];
        w += vowels[rng_.below(std::size(vowels))];
      }
      w += endings[rng_.below(std::size(endings))];
      if (tag_word(w) != PosTag::kNoun || lemmatize_noun(w) != w) continue;
      if (used_.insert(w).second) return w;
    }
  }

  std::vector<std::string> nouns(std::size_t n) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n; ++i) out.push_back(noun());
    return out;
  }

 private:
  Rng& rng_;
  std::set<std::string> used_;
};

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

constexpr std::string_view kAdjectives[] = {"acute", "chronic", "malignant", "benign", "novel", "severe",
                                            "primary", "early", "rare", "systemic", "genetic", "inflammatory"};
constexpr std::string_view kFiller[] = {"a cohort study", "a randomized trial", "a case report",
                                        "patients",       "an update",          "outcomes",
                                        "a review",       "mice",               "a meta-analysis"};
constexpr std::string_view kCities[] = {"Lund", "Oslo", "Leiden", "Boston", "Kyoto", "Porto", "Graz"};

}  // namespace

SynthOutput synthesize(const SynthOptions& o) {
  if (o.publications == 0) throw Error("synthetic corpus needs at least one publication");
  Rng rng(o.seed);
  WordMaker words(rng);

  const std::size_t nd = o.areas * o.disciplines_per_area;
  const std::size_t ns = nd * o.specialties_per_discipline;
  const std::size_t nt = ns * o.topics_per_specialty;

  struct Vocab {
    std::vector<std::string> nouns;
    std::string adjective;
  };
  auto make = [&](std::size_t n, std::size_t k) {
    std::vector<Vocab> v(n);
    for (auto& x : v) {
      x.nouns = words.nouns(k);
      x.adjective = kAdjectives[rng.below(std::size(kAdjectives))];
    }
    return v;
  };
  const auto area_v = make(o.areas, 2);
  const auto disc_v = make(nd, 3);
  const auto spec_v = make(ns, 3);
  const auto topic_v = make(nt, 3);

  std::vector<double> topic_weight(nt), open_rate(nt);
  double total_w = 0;
  for (std::size_t t = 0; t < nt; ++t) {
    topic_weight[t] = rng.uniform(0.6, 1.4);
    open_rate[t] = rng.uniform(0.2, 0.8);
    total_w += topic_weight[t];
  }

  SynthOutput out;
  auto& truth = out.truth;
  std::vector<std::vector<std::uint32_t>> by_topic(nt), by_spec(ns), by_disc(nd), by_area(o.areas);
  for (std::uint32_t i = 0; i < o.publications; ++i) {
    double r = rng.uniform() * total_w;
    std::size_t t = 0;
    while (t + 1 < nt && r >= topic_weight[t]) r -= topic_weight[t++];
    const auto s = t / o.topics_per_specialty;
    const auto d = s / o.specialties_per_discipline;
    const auto a = d / o.disciplines_per_area;
    truth.topic.push_back(static_cast<std::uint32_t>(t));
    truth.specialty.push_back(static_cast<std::uint32_t>(s));
    truth.discipline.push_back(static_cast<std::uint32_t>(d));
    truth.area.push_back(static_cast<std::uint32_t>(a));
    by_topic[t].push_back(i);
    by_spec[s].push_back(i);
    by_disc[d].push_back(i);
    by_area[a].push_back(i);

    const auto& tv = topic_v[t].nouns;
    const auto& sv = spec_v[s].nouns;
    const auto& dv = disc_v[d].nouns;
    PublicationRecord rec;
    rec.pub_id = std::to_string(10000000 + i);
    rec.year = 1995 + static_cast<int>(rng.below(28));
    const auto ta = rng.below(3);
    const auto tb = (ta + 1 + rng.below(2)) % 3;
    rec.title = capitalize(std::string(topic_v[t].adjective)) + " " + tv[ta] + " " + tv[tb] + " and " +
                sv[rng.below(3)] + " in " + std::string(kFiller[rng.below(std::size(kFiller))]);
    if (rng.uniform() < 0.3) rec.title += ": " + spec_v[s].adjective + " " + sv[rng.below(3)] + " " + dv[rng.below(3)];
    const auto sm = rng.below(3);
    rec.mesh_terms = {capitalize(tv[rng.below(3)]), capitalize(sv[sm]) + " " + sv[(sm + 1) % 3],
                      capitalize(dv[rng.below(3)])};
    switch (rng.below(3)) {
      case 0: rec.journal_title = "Journal of " + capitalize(dv[0]) + " and " + capitalize(dv[1]); break;
      case 1: rec.journal_title = capitalize(dv[1]) + " " + capitalize(dv[2]) + " Letters"; break;
      default: rec.journal_title = "Annals of " + capitalize(dv[2]); break;
    }
    rec.author_addresses = {"Department of " + capitalize(dv[rng.below(3)]) + ", " +
                            capitalize(area_v[a].nouns[rng.below(2)]) + " Institute, " +
                            std::string(kCities[rng.below(std::size(kCities))])};
    rec.pub_type = rng.uniform() < 0.9 ? PubType::kArticle : PubType::kReview;
    const double u = rng.uniform();
    if (u < 0.05) {
      rec.oa_status = OaStatus::kUnknown;
    } else if (rng.uniform() < open_rate[t]) {
      static constexpr OaStatus open[] = {OaStatus::kGold, OaStatus::kGreen, OaStatus::kBronze, OaStatus::kHybrid};
      rec.oa_status = open[rng.below(4)];
    } else {
      rec.oa_status = OaStatus::kClosed;
    }
    out.records.push_back(std::move(rec));
  }

  auto pick = [&](const std::vector<std::uint32_t>& pool) { return pool[rng.below(pool.size())]; };
  for (std::uint32_t i = 0; i < o.publications; ++i) {
    const auto k = 1 + rng.below(static_cast<std::uint64_t>(2 * o.citations_per_publication - 1));
    for (std::uint64_t r = 0; r < k; ++r) {
      const double u = rng.uniform();
      std::uint32_t j;
      if (u < o.p_topic) {
        j = pick(by_topic[truth.topic[i]]);
      } else if (u < o.p_topic + o.p_specialty) {
        j = pick(by_spec[truth.specialty[i]]);
      } else if (u < o.p_topic + o.p_specialty + o.p_discipline) {
        j = pick(by_disc[truth.discipline[i]]);
      } else if (u < o.p_topic + o.p_specialty + o.p_discipline + o.p_area) {
        j = pick(by_area[truth.area[i]]);
      } else {
        j = static_cast<std::uint32_t>(rng.below(o.publications));
      }
      if (j == i) continue;
      out.raw_citations.emplace_back(out.records[i].pub_id, out.records[j].pub_id);
    }
  }

  // Noise for the loader.
  const auto noise = std::max<std::size_t>(1, o.publications / 200);
  for (std::size_t k = 0; k < noise; ++k) {
    PublicationRecord ed = out.records[rng.below(o.publications)];
    ed.pub_id = std::to_string(30000000 + k);
    ed.title = "Editorial: " + ed.title;
    ed.year = 2010;
    ed.pub_type = PubType::kArticle;
    PublicationRecord old = ed;
    old.pub_id = std::to_string(40000000 + k);
    old.year = 1990;
    old.title = ed.title.substr(11);
    old.pub_type = PubType::kArticle;
    std::string line = publication_to_json(ed);
    line.replace(line.find("\"pub_type\":\"article\""), 20, "\"pub_type\":\"editorial\"");
    out.editorial_lines.push_back(std::move(line));
    out.records.push_back(old);
    // Editorials are dropped at load, so these citations dangle.
    out.raw_citations.emplace_back(ed.pub_id, out.records[rng.below(o.publications)].pub_id);
    const auto& self = out.records[rng.below(o.publications)].pub_id;
    out.raw_citations.emplace_back(self, self);
    out.raw_citations.emplace_back(out.records[rng.below(o.publications)].pub_id, std::to_string(90000000 + k));
  }
  return out;
}

void write_synthetic(const SynthOutput& out, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const char* name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("publications.jsonl");
    for (const auto& r : out.records) f << publication_to_json(r) << '\n';
    for (const auto& line : out.editorial_lines) f << line << '\n';
  }
  {
    auto f = open("citations.tsv");
    for (const auto& [a, b] : out.raw_citations) f << a << '\t' << b << '\n';
  }
  const auto n = out.truth.topic.size();
  {
    auto f = open("truth.tsv");
    f << "# pub_id\ttopic\tspecialty\tdiscipline\tarea\n";
    for (std::size_t i = 0; i < n; ++i) {
      f << out.records[i].pub_id << '\t' << out.truth.topic[i] << '\t' << out.truth.specialty[i] << '\t'
        << out.truth.discipline[i] << '\t' << out.truth.area[i] << '\n';
    }
  }
  {
    auto f = open("subset.txt");
    for (std::size_t i = 0; i < n; ++i) {
      if (out.truth.discipline[i] == 0 && out.records[i].year >= 2015) f << out.records[i].pub_id << '\n';
    }
  }
  {
    auto f = open("focal.txt");
    for (std::size_t i = 0; i < n; ++i) {
      if (out.truth.discipline[i] == 0 && out.records[i].year >= 2020) f << out.records[i].pub_id << '\n';
    }
  }
}

}  // namespace sciatlas
