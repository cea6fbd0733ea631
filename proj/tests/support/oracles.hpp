// Independent reference implementations used by the unit and acceptance
// tests. Nothing here calls into the library's algorithms.
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

struct Graph {
  std::size_t n = 0;
  std::vector<double> node_weight;  // empty means all ones
  std::vector<std::tuple<std::uint32_t, std::uint32_t, double>> edges;

  double nw(std::size_t i) const { return node_weight.empty() ? 1.0 : node_weight[i]; }
};

/// Direct CPM: internal weight minus gamma * n_c (n_c - 1) / 2 per cluster.
inline double cpm(const Graph& g, const std::vector<std::uint32_t>& labels, double gamma) {
  double internal = 0;
  for (const auto& [u, v, w] : g.edges) {
    if (labels[u] == labels[v]) internal += w;
  }
  std::map<std::uint32_t, double> size;
  for (std::size_t i = 0; i < g.n; ++i) size[labels[i]] += g.nw(i);
  double penalty = 0;
  for (const auto& [c, s] : size) penalty += s * (s - 1) / 2;
  return internal - gamma * penalty;
}

/// Visits every set partition of {0..n-1} as a restricted growth string.
inline void for_each_partition(std::size_t n, const std::function<void(const std::vector<std::uint32_t>&)>& fn) {
  std::vector<std::uint32_t> a(n, 0), maxv(n, 0);
  if (n == 0) {
    fn(a);
    return;
  }
  while (true) {
    fn(a);
    std::size_t i = n - 1;
    while (i > 0 && a[i] > maxv[i - 1]) --i;
    if (i == 0) return;
    ++a[i];
    const std::uint32_t m = std::max(maxv[i - 1], a[i]);
    maxv[i] = m;
    for (std::size_t j = i + 1; j < n; ++j) {
      a[j] = 0;
      maxv[j] = m;
    }
  }
}

inline double best_cpm(const Graph& g, double gamma) {
  double best = -1e300;
  for_each_partition(g.n, [&](const std::vector<std::uint32_t>& p) { best = std::max(best, cpm(g, p, gamma)); });
  return best;
}

inline std::uint64_t bell(std::size_t n) {
  std::uint64_t count = 0;
  for_each_partition(n, [&](const std::vector<std::uint32_t>&) { ++count; });
  return count;
}

/// Normalized mutual information, arithmetic-mean normalization.
inline double nmi(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  const double n = static_cast<double>(a.size());
  std::map<std::uint32_t, double> ca, cb;
  std::map<std::pair<std::uint32_t, std::uint32_t>, double> joint;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ca[a[i]] += 1;
    cb[b[i]] += 1;
    joint[{a[i], b[i]}] += 1;
  }
  auto entropy = [&](const std::map<std::uint32_t, double>& c) {
    double h = 0;
    for (const auto& [k, v] : c) h -= v / n * std::log(v / n);
    return h;
  };
  const double ha = entropy(ca), hb = entropy(cb);
  if (ha == 0 && hb == 0) return 1.0;
  double mi = 0;
  for (const auto& [k, v] : joint) mi += v / n * std::log(v * n / (ca[k.first] * cb[k.second]));
  return mi / ((ha + hb) / 2);
}

/// Every cluster induces a connected subgraph.
inline bool clusters_connected(const Graph& g, const std::vector<std::uint32_t>& labels) {
  std::vector<std::vector<std::uint32_t>> adj(g.n);
  for (const auto& [u, v, w] : g.edges) {
    if (labels[u] == labels[v]) {
      adj[u].push_back(v);
      adj[v].push_back(u);
    }
  }
  std::map<std::uint32_t, std::size_t> size;
  for (auto l : labels) ++size[l];
  std::set<std::uint32_t> seen_cluster;
  std::vector<bool> seen(g.n, false);
  for (std::uint32_t s = 0; s < g.n; ++s) {
    if (seen[s]) continue;
    if (!seen_cluster.insert(labels[s]).second) return false;  // second component of the same cluster
    std::queue<std::uint32_t> q;
    q.push(s);
    seen[s] = true;
    std::size_t reached = 0;
    while (!q.empty()) {
      const auto u = q.front();
      q.pop();
      ++reached;
      for (auto v : adj[u]) {
        if (!seen[v]) {
          seen[v] = true;
          q.push(v);
        }
      }
    }
    if (reached != size[labels[s]]) return false;
  }
  return true;
}

inline bool connected(const Graph& g) {
  return clusters_connected(g, std::vector<std::uint32_t>(g.n, 0));
}

/// Stochastic block model with equal-sized blocks (node i is in block i % k).
inline Graph sbm(std::size_t n, std::size_t k, double p_in, double p_out, std::uint64_t seed,
                 std::vector<std::uint32_t>* truth) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0, 1);
  Graph g;
  g.n = n;
  if (truth) truth->assign(n, 0);
  for (std::uint32_t i = 0; i < n; ++i) {
    if (truth) (*truth)[i] = static_cast<std::uint32_t>(i % k);
    for (std::uint32_t j = i + 1; j < n; ++j) {
      const double p = (i % k == j % k) ? p_in : p_out;
      if (u(rng) < p) g.edges.emplace_back(i, j, 1.0);
    }
  }
  return g;
}

/// Random connected graph: a random spanning tree plus extra edges, random
/// positive weights.
inline Graph random_connected(std::size_t n, double extra_p, std::mt19937_64& rng, bool weighted) {
  std::uniform_real_distribution<double> u(0, 1);
  Graph g;
  g.n = n;
  std::set<std::pair<std::uint32_t, std::uint32_t>> have;
  auto add = [&](std::uint32_t a, std::uint32_t b) {
    if (a > b) std::swap(a, b);
    if (a == b || !have.insert({a, b}).second) return;
    g.edges.emplace_back(a, b, weighted ? 0.1 + u(rng) : 1.0);
  };
  for (std::uint32_t i = 1; i < n; ++i) add(static_cast<std::uint32_t>(rng() % i), i);
  for (std::uint32_t i = 0; i < n; ++i) {
    for (std::uint32_t j = i + 1; j < n; ++j) {
      if (u(rng) < extra_p) add(i, j);
    }
  }
  return g;
}

}  // namespace oracle
