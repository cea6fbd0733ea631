#include <algorithm>
#include <unordered_map>
#include <unordered_set>

#include "sciatlas/labeler.hpp"
#include "sciatlas/util.hpp"

namespace sciatlas {

namespace {

using WordSet = std::unordered_set<std::string_view>;

const WordSet& function_words() {
  static const WordSet words = {
      "a", "an", "the", "this", "that", "these", "those", "of", "in", "on", "at", "by", "for",
      "with", "from", "to", "into", "onto", "upon", "over", "under", "between", "among", "amongst",
      "through", "throughout", "during", "after", "before", "within", "without", "via", "versus",
      "vs", "and", "or", "but", "nor", "not", "no", "as", "than", "then", "both", "either",
      "neither", "each", "every", "all", "any", "some", "such", "other", "another", "more", "most",
      "less", "least", "few", "fewer", "many", "much", "several", "is", "are", "was", "were", "be",
      "been", "being", "am", "has", "have", "had", "having", "do", "does", "did", "done", "can",
      "could", "may", "might", "will", "would", "shall", "should", "must", "it", "its", "they",
      "their", "them", "we", "our", "us", "he", "she", "his", "her", "i", "you", "your", "which",
      "who", "whom", "whose", "what", "when", "where", "why", "how", "whether", "if", "while",
      "also", "only", "very", "there", "here", "about", "against", "across", "along", "toward",
      "towards", "per", "beyond", "behind", "above", "below", "despite", "because", "since",
      "until", "unless", "although", "though", "yet", "so", "thus", "hence", "however",
      "therefore", "whereas", "de", "et", "al", "la", "le", "du", "der", "und", "y", "e",
      // frequent verbs in titles and addresses
      "use", "uses", "used", "using", "show", "shows", "showed", "shown", "reveal", "reveals",
      "suggest", "suggests", "improve", "improves", "increase", "increases", "reduce", "reduces",
      "decrease", "decreases", "affect", "affects", "predict", "predicts", "regulate", "regulates",
      "promote", "promotes", "inhibit", "inhibits", "mediate", "mediates", "induce", "induces",
      "enhance", "enhances", "identify", "identifies", "identifying", "determine", "determines",
      "determining", "evaluate", "evaluates", "evaluating", "assess", "assesses", "assessing",
      "compare", "compares", "comparing", "investigate", "investigates", "investigating",
      "examine", "examines", "examining", "explore", "explores", "exploring", "involve",
      "involves", "involving", "contribute", "contributes", "require", "requires", "provide",
      "provides", "including", "include", "includes", "following", "towards", "among",
  };
  return words;
}

const WordSet& adjectives() {
  static const WordSet words = {
      "new", "old", "high", "low", "large", "small", "early", "late", "acute", "chronic",
      "severe", "mild", "human", "primary", "secondary", "novel", "major", "minor", "common",
      "rare", "malignant", "benign", "young", "elderly", "adult", "open", "free", "public",
      "long", "short", "different", "multiple", "single", "specific", "main", "key", "good",
      "poor", "better", "best", "worse", "first", "second", "third", "recent", "current",
      "future", "atopic", "healthy", "obese", "pregnant", "premature", "preterm", "neonatal",
      "mature", "immature", "active", "inactive", "positive", "negative", "direct", "indirect",
      "complex", "simple", "rapid", "slow", "deep", "superficial", "inflammatory", "invasive",
      "metastatic", "resistant", "sensitive", "dependent", "independent", "due", "similar",
      "distinct", "whole", "intact", "novel", "broad", "narrow", "strong", "weak", "true",
      "false", "rural", "urban", "global", "local", "total", "partial", "systemic", "genetic",
      "pigmented", "psoriatic", "female", "male", "infant", "pediatric", "paediatric",
  };
  return words;
}

// Words that carry an adjective suffix but are nouns in practice.
const WordSet& suffix_nouns() {
  static const WordSet words = {
      "animal", "hospital", "signal", "trial", "journal", "material", "interval", "potential",
      "individual", "survival", "removal", "arrival", "approval", "withdrawal", "referral",
      "disposal", "capital", "metal", "crystal", "principal", "professional", "proposal",
      "rival", "festival", "terminal", "manual", "tutorial", "editorial", "memorial", "canal",
      "clinic", "epidemic", "pandemic", "topic", "music", "logic", "arsenic", "mechanic",
      "objective", "alternative", "derivative", "incentive", "initiative", "perspective",
      "detective", "relative", "representative", "narrative", "sedative", "preservative",
      "additive", "laxative", "directive", "executive", "motive", "explosive", "olive",
      "summary", "library", "boundary", "dictionary", "anniversary", "secretary", "salary",
      "glossary", "commentary", "itinerary", "beneficiary", "missionary", "table", "cable",
      "variable", "vegetable", "timetable", "bible", "handful", "seminar", "calendar",
      "scholar", "pillar", "dollar", "grammar", "nectar", "vinegar", "collar", "cellar",
      "family", "assembly", "anomaly", "supply", "italy", "july", "monopoly", "reply", "ally",
      "rally", "fly", "butterfly", "jelly", "belly", "bully", "lily", "sally", "emily",
      "hemorrhoid", "steroid", "opioid", "thyroid", "adenoid", "colloid", "alkaloid",
      "flavonoid", "cannabinoid", "carotenoid", "arachnoid", "myeloid", "lymphoid",
  };
  return words;
}

bool ends_with(std::string_view w, std::string_view suf) {
  return w.size() >= suf.size() && w.substr(w.size() - suf.size()) == suf;
}

bool has_letter(std::string_view w) {
  return std::any_of(w.begin(), w.end(), [](char c) {
    return (c >= 'a' && c <= 'z') || static_cast<unsigned char>(c) >= 0x80;
  });
}

bool is_word_char(unsigned char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c >= 0x80 ||
         c == '-' || c == '\'';
}

bool is_space(unsigned char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r'; }

}  // namespace

PosTag tag_word(std::string_view w) {
  if (w.size() < 2 || !has_letter(w)) return PosTag::kOther;
  if (function_words().contains(w)) return PosTag::kOther;
  if (adjectives().contains(w)) return PosTag::kAdjective;
  if (suffix_nouns().contains(w)) return PosTag::kNoun;
  if (w.size() >= 5 && ends_with(w, "ly")) return PosTag::kOther;
  if (ends_with(w, "ics")) return PosTag::kNoun;
  struct Rule {
    std::string_view suffix;
    std::size_t min_len;
  };
  static constexpr Rule rules[] = {
      {"al", 5},   {"ic", 5},   {"ous", 5}, {"ive", 5},  {"ary", 6}, {"able", 6},
      {"ible", 6}, {"ful", 6},  {"less", 6}, {"ar", 6},  {"ed", 5},   {"oid", 6},
  };
  if (ends_with(w, "eed")) return PosTag::kNoun;
  for (const auto& r : rules) {
    if (w.size() >= r.min_len && ends_with(w, r.suffix)) return PosTag::kAdjective;
  }
  return PosTag::kNoun;
}

std::string lemmatize_noun(std::string_view w) {
  static const std::unordered_map<std::string_view, std::string_view> irregular = {
      {"mice", "mouse"},          {"children", "child"},       {"women", "woman"},
      {"men", "man"},             {"teeth", "tooth"},          {"feet", "foot"},
      {"geese", "goose"},         {"criteria", "criterion"},   {"phenomena", "phenomenon"},
      {"bacteria", "bacterium"},  {"fungi", "fungus"},         {"nuclei", "nucleus"},
      {"stimuli", "stimulus"},    {"bacilli", "bacillus"},     {"foci", "focus"},
      {"loci", "locus"},          {"indices", "index"},        {"matrices", "matrix"},
      {"appendices", "appendix"}, {"vertices", "vertex"},      {"analyses", "analysis"},
      {"diagnoses", "diagnosis"}, {"prognoses", "prognosis"},  {"metastases", "metastasis"},
      {"hypotheses", "hypothesis"}, {"syntheses", "synthesis"}, {"theses", "thesis"},
      {"crises", "crisis"},       {"larvae", "larva"},         {"vertebrae", "vertebra"},
      {"formulae", "formula"},    {"viruses", "virus"},        {"sinuses", "sinus"},
      {"fetuses", "fetus"},       {"species", "species"},      {"series", "series"},
      {"news", "news"},           {"data", "data"},            {"people", "people"},
      {"lives", "life"},          {"wives", "wife"},           {"knives", "knife"},
      {"leaves", "leaf"},         {"halves", "half"},          {"calves", "calf"},
      {"selves", "self"},         {"biopsies", "biopsy"},      {"diabetes", "diabetes"},
      {"herpes", "herpes"},       {"rabies", "rabies"},        {"scabies", "scabies"},
      {"caries", "caries"},       {"feces", "feces"},          {"faeces", "faeces"},
      {"testes", "testis"},       {"apices", "apex"},          {"cortices", "cortex"},
  };
  if (const auto it = irregular.find(w); it != irregular.end()) return std::string(it->second);
  std::string s(w);
  if (s.size() <= 3) return s;
  for (std::string_view keep : {"ss", "us", "is", "ics", "ous", "as"}) {
    if (ends_with(s, keep)) return s;
  }
  if (ends_with(s, "ies") && s.size() > 4) return s.substr(0, s.size() - 3) + "y";
  if (ends_with(s, "sses")) return s.substr(0, s.size() - 2);
  for (std::string_view es : {"xes", "ches", "shes", "zzes"}) {
    if (ends_with(s, es)) return s.substr(0, s.size() - 2);
  }
  if (ends_with(s, "s")) return s.substr(0, s.size() - 1);
  return s;
}

std::vector<TaggedSegment> tag_text(std::string_view text) {
  std::vector<TaggedSegment> segments;
  TaggedSegment cur;
  auto flush = [&] {
    if (!cur.empty()) segments.push_back(std::move(cur));
    cur.clear();
  };
  std::size_t i = 0;
  while (i < text.size()) {
    const auto c = static_cast<unsigned char>(text[i]);
    if (is_space(c)) {
      ++i;
      continue;
    }
    if (!is_word_char(c)) {
      flush();
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_word_char(static_cast<unsigned char>(text[j]))) ++j;
    std::string tok(text.substr(i, j - i));
    i = j;
    for (auto& ch : tok) {
      if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch - 'A' + 'a');
    }
    if (ends_with(tok, "'s")) tok.resize(tok.size() - 2);
    while (!tok.empty() && (tok.back() == '-' || tok.back() == '\'')) tok.pop_back();
    const auto start = tok.find_first_not_of("-'");
    if (start == std::string::npos) continue;
    tok.erase(0, start);
    TaggedToken t;
    t.tag = tag_word(tok);
    if (t.tag == PosTag::kNoun) t.lemma = lemmatize_noun(tok);
    t.text = std::move(tok);
    cur.push_back(std::move(t));
  }
  flush();
  return segments;
}

std::vector<std::string> phrases_from_segments(const std::vector<TaggedSegment>& segments,
                                               std::size_t max_length) {
  std::vector<std::string> out;
  if (max_length == 0) return out;
  for (const auto& seg : segments) {
    std::size_t i = 0;
    while (i < seg.size()) {
      // Maximal span: adjectives followed by at least one noun.
      std::size_t s = i;
      while (s < seg.size() && seg[s].tag == PosTag::kOther) ++s;
      std::size_t a = s;
      while (a < seg.size() && seg[a].tag == PosTag::kAdjective) ++a;
      std::size_t e = a;
      while (e < seg.size() && seg[e].tag == PosTag::kNoun) ++e;
      if (s >= seg.size()) break;
      if (e == a) {
        i = std::max(a, s + 1);
        continue;
      }
      for (std::size_t from = s; from < e; ++from) {
        const std::size_t last = std::min(e, from + max_length);
        for (std::size_t to = last; to > from; --to) {
          if (seg[to - 1].tag != PosTag::kNoun) continue;
          std::string phrase;
          for (std::size_t k = from; k < to; ++k) {
            if (k > from) phrase += ' ';
            const auto& t = seg[k];
            phrase += t.tag == PosTag::kNoun && !t.lemma.empty() ? t.lemma : t.text;
          }
          out.push_back(std::move(phrase));
        }
      }
      i = e;
    }
  }
  return out;
}

std::vector<std::string> extract_noun_phrases(std::string_view text, std::size_t max_length) {
  return phrases_from_segments(tag_text(text), max_length);
}

PosTag from_penn_tag(std::string_view tag) {
  if (tag.starts_with("NN")) return PosTag::kNoun;
  if (tag.starts_with("JJ")) return PosTag::kAdjective;
  return PosTag::kOther;
}

}  // namespace sciatlas
