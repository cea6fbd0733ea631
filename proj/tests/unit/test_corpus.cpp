#include <fstream>

#include "../support/fixtures.hpp"
#include "doctest.h"
#include "sciatlas/corpus.hpp"
#include "sciatlas/util.hpp"

using namespace sciatlas;

namespace {

void write_text(const std::filesystem::path& p, const std::string& s) {
  std::ofstream(p, std::ios::binary) << s;
}

PublicationRecord sample() {
  PublicationRecord r;
  r.pub_id = "123";
  r.year = 2004;
  r.title = "Malignant melanoma in \"mice\"";
  r.journal_title = "Journal of Oncology";
  r.mesh_terms = {"Melanoma", "Mice"};
  r.author_addresses = {"Dept. of Surgery, Lund"};
  r.pub_type = PubType::kReview;
  r.oa_status = OaStatus::kGreen;
  return r;
}

}  // namespace

TEST_CASE("publication json round trip") {
  const auto r = sample();
  CHECK(parse_publication_json(publication_to_json(r)) == r);
}

TEST_CASE("publication parsing accepts integer ids and rejects bad records") {
  const auto r = parse_publication_json(R"({"pub_id": 77, "year": 2000, "pub_type": "article"})");
  CHECK(r.pub_id == "77");
  CHECK(r.oa_status == OaStatus::kUnknown);
  CHECK_THROWS_AS(parse_publication_json("{not json"), InputError);
  CHECK_THROWS_AS(parse_publication_json(R"({"year": 2000, "pub_type": "article"})"), InputError);
  CHECK_THROWS_AS(parse_publication_json(R"({"pub_id": "1", "year": "x", "pub_type": "article"})"), InputError);
  CHECK_THROWS_AS(parse_publication_json(R"({"pub_id": "1", "year": 2000, "pub_type": "letter"})"), InputError);
  CHECK_THROWS_AS(parse_publication_json(R"({"pub_id": "1", "year": 2000, "pub_type": "article", "oa_status": "shiny"})"),
                  InputError);
}

TEST_CASE("publication loader filters and reports") {
  testkit::TempDir dir("corpus");
  write_text(dir / "p.jsonl",
             R"({"pub_id":"1","year":2000,"pub_type":"article"})"
             "\n"
             R"({"pub_id":"2","year":1990,"pub_type":"article"})"
             "\n"
             R"({"pub_id":"3","year":2001,"pub_type":"editorial"})"
             "\n"
             "garbage\n"
             "\n"
             R"({"pub_id":"1","year":2003,"pub_type":"review"})"
             "\n"
             R"({"pub_id":"4","year":2010,"pub_type":"review","oa_status":"gold"})"
             "\n");
  PublicationLoadReport rep;
  const auto c = load_publications(dir / "p.jsonl", YearRange{1995, 2020}, ParseMode::kLenient, &rep);
  CHECK(c.size() == 2);
  CHECK(rep.lines == 6);
  CHECK(rep.loaded == 2);
  CHECK(rep.skipped_year == 1);
  CHECK(rep.skipped_type == 1);
  CHECK(rep.malformed == 1);
  CHECK(rep.duplicate_ids == 1);
  CHECK(c.find("4").has_value());
  CHECK_FALSE(c.find("2").has_value());
  CHECK_THROWS_AS(load_publications(dir / "p.jsonl", std::nullopt, ParseMode::kStrict), InputError);
  CHECK_THROWS_AS(load_publications(dir / "missing.jsonl"), InputError);
}

TEST_CASE("citation loader drops self loops, duplicates and dangling rows") {
  testkit::TempDir dir("cites");
  write_text(dir / "p.jsonl",
             R"({"pub_id":"1","year":2000,"pub_type":"article"})"
             "\n"
             R"({"pub_id":"2","year":2000,"pub_type":"article"})"
             "\n"
             R"({"pub_id":"3","year":2000,"pub_type":"article"})"
             "\n");
  write_text(dir / "c.tsv", "1\t2\n1\t2\n2\t2\n3\t99\nbad row\n2\t3\r\n3\t1\n");
  auto c = load_publications(dir / "p.jsonl");
  CitationLoadReport rep;
  load_citations(dir / "c.tsv", c, ParseMode::kLenient, &rep);
  CHECK(rep.rows == 7);
  CHECK(rep.kept == 3);
  CHECK(rep.duplicates == 1);
  CHECK(rep.self_loops == 1);
  CHECK(rep.dangling == 1);
  CHECK(rep.malformed == 1);
  CHECK(c.citations() == std::vector<CitationEdge>{{0, 1}, {1, 2}, {2, 0}});
  CHECK_THROWS_AS(load_citations(dir / "c.tsv", c, ParseMode::kStrict), InputError);
}

TEST_CASE("corpus write and reload is lossless") {
  std::mt19937_64 rng(3);
  const auto c = testkit::random_corpus(50, 3, rng);
  testkit::TempDir dir("rt");
  write_publications(dir / "p.jsonl", c);
  write_citations(dir / "c.tsv", c);
  auto back = load_publications(dir / "p.jsonl", std::nullopt, ParseMode::kStrict);
  load_citations(dir / "c.tsv", back, ParseMode::kStrict);
  CHECK(back == c);
}

TEST_CASE("subset and metric files") {
  std::mt19937_64 rng(4);
  const auto c = testkit::random_corpus(10, 1, rng);
  testkit::TempDir dir("subset");
  write_text(dir / "s.txt", "1003\n\n1001\nnope\n1003\n");
  const auto s = load_subset(dir / "s.txt", c);
  CHECK(s.members == std::vector<std::uint32_t>{1, 3});
  CHECK(s.unknown == 1);
  write_text(dir / "m.tsv", "1000\t0.25\n1002\ttrue\n1004\tfalse\nzzz\t1\n");
  const auto m = load_metric(dir / "m.tsv", c);
  CHECK(m.values.size() == 3);
  CHECK(m.values.at(0) == 0.25);
  CHECK(m.values.at(2) == 1.0);
  CHECK(m.values.at(4) == 0.0);
  CHECK(m.unknown == 1);
}
