#include "sciatlas/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <unordered_set>

#include "json.hpp"

#include "sciatlas/util.hpp"

namespace sciatlas {

namespace {

constexpr std::size_t kMaxWarnings = 20;

void warn(std::vector<std::string>& sink, std::string msg) {
  if (sink.size() < kMaxWarnings) sink.push_back(std::move(msg));
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  return in;
}

std::string string_field(const nlohmann::json& j, const char* key, bool required) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) {
    if (required) throw InputError(std::string("missing key '") + key + "'");
    return {};
  }
  if (!it->is_string()) throw InputError(std::string("key '") + key + "' is not a string");
  return it->get<std::string>();
}

std::vector<std::string> string_list(const nlohmann::json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return {};
  if (!it->is_array()) throw InputError(std::string("key '") + key + "' is not an array");
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_string()) throw InputError(std::string("key '") + key + "' has a non-string entry");
    out.push_back(v.get<std::string>());
  }
  return out;
}

}  // namespace

std::string_view to_string(PubType t) { return t == PubType::kReview ? "review" : "article"; }

std::string_view to_string(OaStatus s) {
  switch (s) {
    case OaStatus::kGold: return "gold";
    case OaStatus::kBronze: return "bronze";
    case OaStatus::kGreen: return "green";
    case OaStatus::kHybrid: return "hybrid";
    case OaStatus::kClosed: return "closed";
    case OaStatus::kUnknown: break;
  }
  return "unknown";
}

std::optional<PubType> parse_pub_type(std::string_view s) {
  if (s == "article") return PubType::kArticle;
  if (s == "review") return PubType::kReview;
  return std::nullopt;
}

std::optional<OaStatus> parse_oa_status(std::string_view s) {
  for (auto st : {OaStatus::kGold, OaStatus::kBronze, OaStatus::kGreen, OaStatus::kHybrid,
                  OaStatus::kClosed, OaStatus::kUnknown}) {
    if (s == to_string(st)) return st;
  }
  return std::nullopt;
}

bool Corpus::add(PublicationRecord rec) {
  const auto idx = static_cast<std::uint32_t>(pubs_.size());
  if (!index_.emplace(rec.pub_id, idx).second) return false;
  pubs_.push_back(std::move(rec));
  return true;
}

void Corpus::set_citations(std::vector<CitationEdge> edges) {
  const auto n = pubs_.size();
  std::erase_if(edges, [n](const CitationEdge& e) {
    return e.citing == e.cited || e.citing >= n || e.cited >= n;
  });
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  citations_ = std::move(edges);
}

std::optional<std::uint32_t> Corpus::find(std::string_view pub_id) const {
  const auto it = index_.find(std::string(pub_id));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

// Pub type is returned as parsed text through the out-parameter so the
// loader can distinguish a skipped type from a malformed line.
static PublicationRecord parse_record(std::string_view line, std::string& type_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw InputError("record is not a JSON object");
  PublicationRecord rec;
  const auto id = j.find("pub_id");
  if (id == j.end()) throw InputError("missing key 'pub_id'");
  if (id->is_string()) {
    rec.pub_id = id->get<std::string>();
  } else if (id->is_number_integer()) {
    rec.pub_id = std::to_string(id->get<long long>());
  } else {
    throw InputError("key 'pub_id' is not a string");
  }
  if (rec.pub_id.empty()) throw InputError("empty pub_id");
  const auto year = j.find("year");
  if (year == j.end() || !year->is_number_integer()) throw InputError("missing or non-integer 'year'");
  rec.year = year->get<int>();
  rec.title = string_field(j, "title", false);
  rec.journal_title = string_field(j, "journal_title", false);
  rec.mesh_terms = string_list(j, "mesh_terms");
  rec.author_addresses = string_list(j, "author_addresses");
  type_text = string_field(j, "pub_type", true);
  rec.pub_type = parse_pub_type(type_text).value_or(PubType::kArticle);
  const auto oa = string_field(j, "oa_status", false);
  if (!oa.empty()) {
    const auto st = parse_oa_status(oa);
    if (!st) throw InputError("unrecognized oa_status '" + oa + "'");
    rec.oa_status = *st;
  }
  return rec;
}

PublicationRecord parse_publication_json(std::string_view line) {
  std::string type_text;
  auto rec = parse_record(line, type_text);
  if (!parse_pub_type(type_text)) throw InputError("unsupported pub_type '" + type_text + "'");
  return rec;
}

std::string publication_to_json(const PublicationRecord& rec) {
  nlohmann::ordered_json j;
  j["pub_id"] = rec.pub_id;
  j["year"] = rec.year;
  j["title"] = rec.title;
  j["journal_title"] = rec.journal_title;
  j["mesh_terms"] = rec.mesh_terms;
  j["author_addresses"] = rec.author_addresses;
  j["pub_type"] = to_string(rec.pub_type);
  j["oa_status"] = to_string(rec.oa_status);
  return j.dump();
}

Corpus load_publications(const std::filesystem::path& path, std::optional<YearRange> year_filter,
                         ParseMode mode, PublicationLoadReport* report) {
  auto in = open_input(path);
  PublicationLoadReport local;
  auto& rep = report ? *report : local;
  rep = {};
  Corpus corpus;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    ++rep.lines;
    PublicationRecord rec;
    std::string type_text;
    try {
      rec = parse_record(line, type_text);
    } catch (const InputError& e) {
      const std::string msg = path.string() + ":" + std::to_string(lineno) + ": " + e.what();
      if (mode == ParseMode::kStrict) throw InputError(msg);
      ++rep.malformed;
      warn(rep.warnings, msg);
      continue;
    }
    if (!parse_pub_type(type_text)) {
      ++rep.skipped_type;
      continue;
    }
    if (year_filter && !year_filter->contains(rec.year)) {
      ++rep.skipped_year;
      continue;
    }
    const std::string id = rec.pub_id;
    if (!corpus.add(std::move(rec))) {
      const std::string msg =
          path.string() + ":" + std::to_string(lineno) + ": duplicate pub_id '" + id + "'";
      if (mode == ParseMode::kStrict) throw InputError(msg);
      ++rep.duplicate_ids;
      warn(rep.warnings, msg);
      continue;
    }
    ++rep.loaded;
  }
  return corpus;
}

void load_citations(const std::filesystem::path& path, Corpus& corpus, ParseMode mode,
                    CitationLoadReport* report) {
  auto in = open_input(path);
  CitationLoadReport local;
  auto& rep = report ? *report : local;
  rep = {};
  std::vector<CitationEdge> edges;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    ++rep.rows;
    const auto cols = split(line, '\t');
    if (cols.size() != 2 || trim(cols[0]).empty() || trim(cols[1]).empty()) {
      const std::string msg = path.string() + ":" + std::to_string(lineno) +
                              ": expected two tab-separated columns";
      if (mode == ParseMode::kStrict) throw InputError(msg);
      ++rep.malformed;
      warn(rep.warnings, msg);
      continue;
    }
    const auto a = corpus.find(trim(cols[0]));
    const auto b = corpus.find(trim(cols[1]));
    if (trim(cols[0]) == trim(cols[1])) {
      ++rep.self_loops;
      continue;
    }
    if (!a || !b) {
      ++rep.dangling;
      continue;
    }
    edges.push_back({*a, *b});
  }
  const std::size_t before = edges.size();
  corpus.set_citations(std::move(edges));
  rep.kept = corpus.citations().size();
  rep.duplicates = before - rep.kept;
}

Subset load_subset(const std::filesystem::path& path, const Corpus& corpus) {
  auto in = open_input(path);
  Subset out;
  std::string line;
  while (std::getline(in, line)) {
    const auto id = trim(line);
    if (id.empty()) continue;
    if (const auto idx = corpus.find(id)) {
      out.members.push_back(*idx);
    } else {
      ++out.unknown;
    }
  }
  std::sort(out.members.begin(), out.members.end());
  out.members.erase(std::unique(out.members.begin(), out.members.end()), out.members.end());
  return out;
}

MetricFile load_metric(const std::filesystem::path& path, const Corpus& corpus) {
  auto in = open_input(path);
  MetricFile out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 2) {
      throw InputError(path.string() + ":" + std::to_string(lineno) +
                       ": expected `pub_id<TAB>value`");
    }
    const auto idx = corpus.find(trim(cols[0]));
    if (!idx) {
      ++out.unknown;
      continue;
    }
    const auto text = trim(cols[1]);
    double v = 0.0;
    if (text == "true") {
      v = 1.0;
    } else if (text == "false") {
      v = 0.0;
    } else {
      const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
      if (ec != std::errc() || ptr != text.data() + text.size()) {
        throw InputError(path.string() + ":" + std::to_string(lineno) + ": bad value '" +
                         std::string(text) + "'");
      }
    }
    out.values[*idx] = v;
  }
  return out;
}

void write_publications(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& p : corpus.publications()) out << publication_to_json(p) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

void write_citations(const std::filesystem::path& path, const Corpus& corpus) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& e : corpus.citations()) {
    out << corpus[e.citing].pub_id << '\t' << corpus[e.cited].pub_id << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace sciatlas
