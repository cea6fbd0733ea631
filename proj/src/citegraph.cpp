#include "sciatlas/citegraph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "sciatlas/util.hpp"

namespace sciatlas {

WeightedGraph::WeightedGraph(std::vector<double> node_weights, std::vector<Edge> edges)
    : node_weights_(std::move(node_weights)), edges_(std::move(edges)) {
  const auto n = node_weights_.size();
  for (double w : node_weights_) {
    if (!std::isfinite(w) || w < 0) throw Error("node weight must be finite and non-negative");
  }
  for (auto& e : edges_) {
    if (e.u > e.v) std::swap(e.u, e.v);
    if (e.u == e.v) throw Error("self-loop on node " + std::to_string(e.u));
    if (e.v >= n) throw Error("edge endpoint " + std::to_string(e.v) + " out of range");
    if (!std::isfinite(e.weight) || e.weight < 0) throw Error("edge weight must be finite and non-negative");
  }
  std::sort(edges_.begin(), edges_.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  for (std::size_t i = 1; i < edges_.size(); ++i) {
    if (edges_[i].u == edges_[i - 1].u && edges_[i].v == edges_[i - 1].v) {
      throw Error("duplicate edge " + std::to_string(edges_[i].u) + "-" + std::to_string(edges_[i].v));
    }
  }

  std::vector<std::size_t> deg(n + 1, 0);
  for (const auto& e : edges_) {
    ++deg[e.u];
    ++deg[e.v];
  }
  offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) offsets_[i + 1] = offsets_[i] + deg[i];
  adj_.resize(offsets_[n]);
  std::vector<std::size_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (const auto& e : edges_) adj_[fill[e.v]++] = {e.u, e.weight};
  for (const auto& e : edges_) adj_[fill[e.u]++] = {e.v, e.weight};
  for (std::size_t i = 0; i < n; ++i) {
    std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i]),
              adj_.begin() + static_cast<std::ptrdiff_t>(offsets_[i + 1]),
              [](const Neighbor& a, const Neighbor& b) { return a.node < b.node; });
  }
}

double WeightedGraph::total_node_weight() const {
  double s = 0;
  for (double w : node_weights_) s += w;
  return s;
}

std::uint32_t Partition::cluster_count() const {
  std::uint32_t k = 0;
  for (auto c : assignment) k = std::max(k, c + 1);
  return k;
}

std::vector<std::vector<std::uint32_t>> Partition::members() const {
  std::vector<std::vector<std::uint32_t>> out(cluster_count());
  for (std::uint32_t i = 0; i < assignment.size(); ++i) out[assignment[i]].push_back(i);
  return out;
}

Partition Partition::singletons(std::size_t n) {
  Partition p;
  p.assignment.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) p.assignment[i] = i;
  return p;
}

WeightedGraph build_normalized_graph(const Corpus& corpus) {
  const auto n = corpus.size();
  std::vector<Edge> pairs;
  pairs.reserve(corpus.citations().size());
  for (const auto& c : corpus.citations()) {
    pairs.push_back({std::min(c.citing, c.cited), std::max(c.citing, c.cited), 0.0});
  }
  std::sort(pairs.begin(), pairs.end(),
            [](const Edge& a, const Edge& b) { return a.u != b.u ? a.u < b.u : a.v < b.v; });
  pairs.erase(std::unique(pairs.begin(), pairs.end(),
                          [](const Edge& a, const Edge& b) { return a.u == b.u && a.v == b.v; }),
              pairs.end());
  std::vector<std::uint32_t> k(n, 0);
  for (const auto& e : pairs) {
    ++k[e.u];
    ++k[e.v];
  }
  for (auto& e : pairs) e.weight = (1.0 / k[e.u] + 1.0 / k[e.v]) / 2.0;
  return WeightedGraph::unit(n, std::move(pairs));
}

WeightedGraph sum_between_clusters(const WeightedGraph& graph, const Partition& partition) {
  const auto n = graph.node_count();
  if (partition.assignment.size() < n) {
    throw Error("partition does not cover node " + std::to_string(partition.assignment.size()));
  }
  if (partition.assignment.size() > n) throw Error("partition has more entries than the graph has nodes");
  const auto k = partition.cluster_count();
  std::vector<double> weights(k, 0.0);
  for (std::uint32_t i = 0; i < n; ++i) weights[partition.assignment[i]] += graph.node_weight(i);

  std::vector<Edge> cross;
  cross.reserve(graph.edge_count());
  for (const auto& e : graph.edges()) {
    auto a = partition.assignment[e.u];
    auto b = partition.assignment[e.v];
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    cross.push_back({a, b, e.weight});
  }
  std::stable_sort(cross.begin(), cross.end(),
                   [](const Edge& x, const Edge& y) { return x.u != y.u ? x.u < y.u : x.v < y.v; });
  std::vector<Edge> merged;
  for (const auto& e : cross) {
    if (!merged.empty() && merged.back().u == e.u && merged.back().v == e.v) {
      merged.back().weight += e.weight;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged, [](const Edge& e) { return e.weight <= 0.0; });
  return WeightedGraph(std::move(weights), std::move(merged));
}

WeightedGraph aggregate_graph(const WeightedGraph& graph, const Partition& partition) {
  const auto sums = sum_between_clusters(graph, partition);
  std::vector<Edge> edges = sums.edges();
  for (auto& e : edges) {
    const double denom = sums.node_weight(e.u) * sums.node_weight(e.v);
    e.weight = denom > 0 ? e.weight / denom : 0.0;
  }
  std::erase_if(edges, [](const Edge& e) { return e.weight <= 0.0; });
  return WeightedGraph(sums.node_weights(), std::move(edges));
}

void write_graph(const std::filesystem::path& path, const WeightedGraph& graph) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  char buf[64];
  out << "# sciatlas-graph v1\t" << graph.node_count() << '\t' << graph.edge_count() << '\n';
  for (double w : graph.node_weights()) {
    std::snprintf(buf, sizeof buf, "%.17g", w);
    out << buf << '\n';
  }
  for (const auto& e : graph.edges()) {
    std::snprintf(buf, sizeof buf, "%.17g", e.weight);
    out << e.u << '\t' << e.v << '\t' << buf << '\n';
  }
  if (!out) throw Error("write failed: " + path.string());
}

WeightedGraph read_graph(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::string header;
  std::getline(in, header);
  const auto cols = split(header, '\t');
  if (cols.size() != 3 || cols[0] != "# sciatlas-graph v1") {
    throw InputError(path.string() + ": not a sciatlas graph file");
  }
  const auto n = std::stoull(cols[1]);
  const auto m = std::stoull(cols[2]);
  std::vector<double> weights(n);
  for (auto& w : weights) {
    if (!(in >> w)) throw InputError(path.string() + ": truncated node weights");
  }
  std::vector<Edge> edges(m);
  for (auto& e : edges) {
    if (!(in >> e.u >> e.v >> e.weight)) throw InputError(path.string() + ": truncated edge list");
  }
  return WeightedGraph(std::move(weights), std::move(edges));
}

}  // namespace sciatlas
