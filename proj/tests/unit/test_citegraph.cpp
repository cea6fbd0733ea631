#include <map>
#include <set>

#include "../support/fixtures.hpp"
#include "doctest.h"
#include "sciatlas/citegraph.hpp"
#include "sciatlas/util.hpp"

using namespace sciatlas;

TEST_CASE("graph construction validates edges") {
  CHECK_THROWS_AS(WeightedGraph::unit(3, {{1, 1, 1.0}}), Error);
  CHECK_THROWS_AS(WeightedGraph::unit(3, {{0, 5, 1.0}}), Error);
  CHECK_THROWS_AS(WeightedGraph::unit(3, {{0, 1, -1.0}}), Error);
  CHECK_THROWS_AS(WeightedGraph::unit(3, {{0, 1, 1.0}, {1, 0, 2.0}}), Error);
  const auto g = WeightedGraph::unit(3, {{2, 0, 1.5}});
  CHECK(g.edges().front() == Edge{0, 2, 1.5});
  CHECK(g.neighbors(2).size() == 1);
  CHECK(g.neighbors(2)[0].node == 0);
  CHECK(g.degree(1) == 0);
  CHECK(g.total_node_weight() == 3.0);
}

TEST_CASE("normalized weights match a brute-force recount") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 20; ++round) {
    const auto c = testkit::random_corpus(40 + rng() % 40, 2.5, rng);
    // Oracle: distinct related publications per node, in either direction.
    std::vector<std::set<std::uint32_t>> rel(c.size());
    for (const auto& e : c.citations()) {
      rel[e.citing].insert(e.cited);
      rel[e.cited].insert(e.citing);
    }
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> expected;
    for (std::uint32_t i = 0; i < c.size(); ++i) {
      for (auto j : rel[i]) {
        if (i < j) expected[{i, j}] = (1.0 / rel[i].size() + 1.0 / rel[j].size()) / 2.0;
      }
    }
    const auto g = build_normalized_graph(c);
    REQUIRE(g.node_count() == c.size());
    REQUIRE(g.edge_count() == expected.size());
    for (const auto& e : g.edges()) {
      const auto it = expected.find({e.u, e.v});
      REQUIRE(it != expected.end());
      CHECK(e.weight == doctest::Approx(it->second).epsilon(1e-15));
    }
  }
}

TEST_CASE("mutual citation counts once") {
  Corpus c;
  for (int i = 0; i < 3; ++i) c.add({std::to_string(i), 2000});
  c.set_citations({{0, 1}, {1, 0}, {1, 2}});
  const auto g = build_normalized_graph(c);
  REQUIRE(g.edge_count() == 2);
  CHECK(g.edges()[0].weight == doctest::Approx((1.0 + 0.5) / 2));
  CHECK(g.edges()[1].weight == doctest::Approx((0.5 + 1.0) / 2));
}

TEST_CASE("aggregation averages over member pairs") {
  std::mt19937_64 rng(12);
  for (int round = 0; round < 20; ++round) {
    const std::size_t n = 10 + rng() % 30;
    auto og = oracle::random_connected(n, 0.2, rng, true);
    og.node_weight.resize(n);
    for (auto& w : og.node_weight) w = 1 + static_cast<double>(rng() % 4);
    const auto g = testkit::to_weighted(og);
    const std::uint32_t k = 1 + rng() % 5;
    Partition p;
    for (std::size_t i = 0; i < n; ++i) p.assignment.push_back(i < k ? i : rng() % k);

    std::vector<double> size(k, 0);
    for (std::size_t i = 0; i < n; ++i) size[p.assignment[i]] += og.nw(i);
    std::map<std::pair<std::uint32_t, std::uint32_t>, double> cross;
    for (const auto& [u, v, w] : og.edges) {
      auto a = p.assignment[u], b = p.assignment[v];
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      cross[{a, b}] += w;
    }
    const auto summed = sum_between_clusters(g, p);
    const auto avg = aggregate_graph(g, p);
    REQUIRE(avg.node_count() == k);
    REQUIRE(avg.edge_count() == cross.size());
    for (std::uint32_t c = 0; c < k; ++c) CHECK(avg.node_weight(c) == doctest::Approx(size[c]));
    for (std::size_t i = 0; i < avg.edge_count(); ++i) {
      const auto& e = avg.edges()[i];
      const double total = cross.at({e.u, e.v});
      CHECK(summed.edges()[i].weight == doctest::Approx(total));
      CHECK(e.weight == doctest::Approx(total / (size[e.u] * size[e.v])));
    }
  }
}

TEST_CASE("graph files round trip exactly") {
  std::mt19937_64 rng(13);
  auto og = oracle::random_connected(30, 0.1, rng, true);
  og.node_weight.assign(30, 0.1);
  const auto g = testkit::to_weighted(og);
  testkit::TempDir dir("graph");
  write_graph(dir / "g.tsv", g);
  CHECK(read_graph(dir / "g.tsv") == g);
}

TEST_CASE("partition helpers") {
  const Partition p{{2, 0, 2, 1}};
  CHECK(p.cluster_count() == 3);
  const auto m = p.members();
  CHECK(m[2] == std::vector<std::uint32_t>{0, 2});
  CHECK(Partition::singletons(3).assignment == std::vector<std::uint32_t>{0, 1, 2});
}
