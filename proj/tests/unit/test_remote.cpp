#include <atomic>
#include <fstream>
#include <mutex>
#include <thread>

#include "../support/fixtures.hpp"
#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "sciatlas/remote.hpp"
#include "sciatlas/util.hpp"

using namespace sciatlas;

namespace {

// Each id n cites n+1 and is cited by n+2.
class FakeApi {
 public:
  FakeApi() {
    server_.Get("/api/pubs", [this](const httplib::Request& req, httplib::Response& res) {
      const int call = calls_++;
      if (call < throttle_first_) {
        res.status = 429;
        res.set_header("Retry-After", "0");
        return;
      }
      {
        std::lock_guard<std::mutex> lock(mu_);
        batches_.push_back(split(req.get_param_value("pmids"), ','));
      }
      nlohmann::json data = nlohmann::json::array();
      for (const auto& id : split(req.get_param_value("pmids"), ',')) {
        const long n = std::stol(id);
        data.push_back({{"pmid", n}, {"references", {std::to_string(n + 1)}}, {"cited_by", {n + 2}}});
      }
      data.push_back({{"references", {"1"}}});  // no pmid
      res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeApi() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/api/pubs"; }
  void throttle_first(int n) { throttle_first_ = n; }
  int calls() const { return calls_; }
  std::vector<std::vector<std::string>> batches() {
    std::lock_guard<std::mutex> lock(mu_);
    return batches_;
  }

 private:
  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> calls_{0};
  std::atomic<int> throttle_first_{0};
  std::mutex mu_;
  std::vector<std::vector<std::string>> batches_;
};

std::vector<std::string> make_ids(int n) {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(std::to_string(100000 + i));
  return out;
}

std::size_t line_count(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) ++n;
  return n;
}

FetchOptions fast(const FakeApi& api) {
  FetchOptions o;
  o.endpoint = api.endpoint();
  o.rate_limit = 1000;
  o.backoff_seconds = 0.001;
  o.timeout_seconds = 5;
  return o;
}

}  // namespace

TEST_CASE("ids are fetched in batches and written as citing/cited rows") {
  FakeApi api;
  testkit::TempDir dir("fetch");
  const auto r = fetch_citations_remote(make_ids(1200), fast(api), dir / "c.tsv");
  CHECK(r.batches == 3);
  CHECK(r.requests == 3);
  CHECK(r.edges == 2400);
  CHECK(r.malformed == 3);
  const auto batches = api.batches();
  REQUIRE(batches.size() == 3);
  CHECK(batches[0].size() == 500);
  CHECK(batches[2].size() == 200);
  CHECK(line_count(dir / "c.tsv") == 2400);
  std::ifstream in(dir / "c.tsv");
  std::string first, second;
  std::getline(in, first);
  std::getline(in, second);
  CHECK(first == "100000\t100001");
  CHECK(second == "100002\t100000");
}

TEST_CASE("rate limiting responses are retried") {
  FakeApi api;
  api.throttle_first(2);
  testkit::TempDir dir("retry");
  const auto r = fetch_citations_remote(make_ids(10), fast(api), dir / "c.tsv");
  CHECK(r.retries == 2);
  CHECK(r.requests == 3);
  CHECK(r.edges == 20);
}

TEST_CASE("retries give up after the limit") {
  FakeApi api;
  api.throttle_first(100);
  testkit::TempDir dir("giveup");
  auto o = fast(api);
  o.max_retries = 2;
  CHECK_THROWS_WITH_AS(fetch_citations_remote(make_ids(3), o, dir / "c.tsv"), doctest::Contains("giving up"), Error);
  CHECK(api.calls() == 3);
}

TEST_CASE("a rerun resumes from the journal") {
  FakeApi api;
  testkit::TempDir dir("resume");
  const auto ids = make_ids(1200);
  auto o = fast(api);
  fetch_citations_remote(ids, o, dir / "c.tsv");
  // Pretend the last batch never finished.
  {
    std::ifstream in(dir / "c.tsv.journal");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    lines.pop_back();
    std::ofstream out(dir / "c.tsv.journal", std::ios::trunc);
    for (const auto& l : lines) out << l << '\n';
  }
  const auto r = fetch_citations_remote(ids, o, dir / "c.tsv");
  CHECK(r.resumed == 2);
  CHECK(r.requests == 1);
  CHECK(api.batches().size() == 4);
  // A different id list starts over.
  const auto fresh = fetch_citations_remote(make_ids(600), o, dir / "c.tsv");
  CHECK(fresh.resumed == 0);
  CHECK(line_count(dir / "c.tsv") == 1200);
}

TEST_CASE("fetch argument checks") {
  testkit::TempDir dir("args");
  FetchOptions o;
  o.endpoint = "localhost/api";
  CHECK(fetch_citations_remote({}, o, dir / "c.tsv").requests == 0);
  CHECK_THROWS(fetch_citations_remote({"1"}, o, dir / "c.tsv"));
  o.endpoint = "http://127.0.0.1:1/x";
  o.batch_size = 0;
  CHECK_THROWS(fetch_citations_remote({"1"}, o, dir / "c.tsv"));
}
