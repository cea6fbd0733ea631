#include "sciatlas/leiden.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>

#include "sciatlas/util.hpp"

namespace sciatlas {

namespace {

// Compact CSR network used inside the optimizer; aggregated levels are
// rebuilt as new instances.
struct Net {
  std::vector<double> nw;
  std::vector<std::size_t> off{0};
  std::vector<std::uint32_t> nbr;
  std::vector<double> w;

  std::size_t n() const { return nw.size(); }
};

Net from_graph(const WeightedGraph& g) {
  Net net;
  net.nw = g.node_weights();
  net.off.assign(g.node_count() + 1, 0);
  for (std::uint32_t i = 0; i < g.node_count(); ++i) {
    for (const auto& nb : g.neighbors(i)) {
      net.nbr.push_back(nb.node);
      net.w.push_back(nb.weight);
    }
    net.off[i + 1] = net.nbr.size();
  }
  return net;
}

// Relabels cluster ids densely in order of first appearance.
std::uint32_t relabel(std::vector<std::uint32_t>& cl) {
  std::vector<std::uint32_t> map(cl.size(), UINT32_MAX);
  std::uint32_t next = 0;
  for (auto& c : cl) {
    if (map[c] == UINT32_MAX) map[c] = next++;
    c = map[c];
  }
  return next;
}

Net aggregate(const Net& net, const std::vector<std::uint32_t>& cl, std::uint32_t k) {
  std::vector<std::vector<std::uint32_t>> members(k);
  for (std::uint32_t v = 0; v < net.n(); ++v) members[cl[v]].push_back(v);
  Net agg;
  agg.nw.assign(k, 0.0);
  agg.off.assign(k + 1, 0);
  std::vector<double> acc(k, 0.0);
  std::vector<char> seen(k, 0);
  std::vector<std::uint32_t> touched;
  for (std::uint32_t r = 0; r < k; ++r) {
    touched.clear();
    for (auto v : members[r]) {
      agg.nw[r] += net.nw[v];
      for (auto e = net.off[v]; e < net.off[v + 1]; ++e) {
        const auto s = cl[net.nbr[e]];
        if (s == r) continue;
        if (!seen[s]) {
          seen[s] = 1;
          touched.push_back(s);
        }
        acc[s] += net.w[e];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (auto s : touched) {
      agg.nbr.push_back(s);
      agg.w.push_back(acc[s]);
      acc[s] = 0.0;
      seen[s] = 0;
    }
    agg.off[r + 1] = agg.nbr.size();
  }
  return agg;
}

// Queue-based local moving. Each popped node goes to the cluster with the
// largest CPM gain; ties keep the current cluster, otherwise the lowest id.
void fast_local_move(const Net& net, std::vector<std::uint32_t>& cl, double gamma, Rng& rng) {
  const auto n = net.n();
  std::vector<double> cw(n, 0.0);
  std::vector<std::uint32_t> cnt(n, 0);
  for (std::uint32_t v = 0; v < n; ++v) {
    cw[cl[v]] += net.nw[v];
    ++cnt[cl[v]];
  }
  std::vector<std::uint32_t> empty;
  for (std::uint32_t c = static_cast<std::uint32_t>(n); c-- > 0;) {
    if (cnt[c] == 0) empty.push_back(c);
  }

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  rng.shuffle(order);
  std::deque<std::uint32_t> queue(order.begin(), order.end());
  std::vector<char> queued(n, 1);

  std::vector<double> ew(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> touched;

  while (!queue.empty()) {
    const auto v = queue.front();
    queue.pop_front();
    queued[v] = 0;
    const auto c = cl[v];

    touched.clear();
    for (auto e = net.off[v]; e < net.off[v + 1]; ++e) {
      const auto k = cl[net.nbr[e]];
      if (!seen[k]) {
        seen[k] = 1;
        touched.push_back(k);
      }
      ew[k] += net.w[e];
    }
    cw[c] -= net.nw[v];
    --cnt[c];
    const bool c_empty = cnt[c] == 0;

    std::uint32_t best = c;
    double best_gain = ew[c] - gamma * net.nw[v] * cw[c];
    std::sort(touched.begin(), touched.end());
    for (auto k : touched) {
      if (k == c) continue;
      const double g = ew[k] - gamma * net.nw[v] * cw[k];
      if (g > best_gain || (g == best_gain && best != c && k < best)) {
        best = k;
        best_gain = g;
      }
    }
    if (!c_empty && !empty.empty() && 0.0 > best_gain) {
      best = empty.back();
      best_gain = 0.0;
    }
    for (auto k : touched) {
      ew[k] = 0.0;
      seen[k] = 0;
    }

    if (!c_empty && !empty.empty() && best == empty.back()) empty.pop_back();
    if (c_empty && best != c) empty.push_back(c);
    cw[best] += net.nw[v];
    ++cnt[best];
    cl[v] = best;

    if (best != c) {
      for (auto e = net.off[v]; e < net.off[v + 1]; ++e) {
        const auto u = net.nbr[e];
        if (!queued[u] && cl[u] != best) {
          queued[u] = 1;
          queue.push_back(u);
        }
      }
    }
  }
}

// Refinement: starting from singletons, merges well-connected nodes into
// well-connected sub-clusters of their cluster. The target is drawn with
// probability proportional to exp(gain / theta) among non-negative gains.
std::vector<std::uint32_t> refine(const Net& net, const std::vector<std::uint32_t>& cl,
                                  std::uint32_t k, double gamma, double theta, Rng& rng) {
  const auto n = net.n();
  std::vector<std::uint32_t> refined(n);
  std::iota(refined.begin(), refined.end(), 0u);
  std::vector<double> rw = net.nw;
  std::vector<double> cluster_w(k, 0.0);
  for (std::uint32_t v = 0; v < n; ++v) cluster_w[cl[v]] += net.nw[v];
  std::vector<double> ext(n, 0.0);
  for (std::uint32_t v = 0; v < n; ++v) {
    for (auto e = net.off[v]; e < net.off[v + 1]; ++e) {
      if (cl[net.nbr[e]] == cl[v]) ext[v] += net.w[e];
    }
  }
  std::vector<char> nonsingleton(n, 0);

  std::vector<std::uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0u);
  rng.shuffle(order);

  std::vector<double> ew(n, 0.0);
  std::vector<char> seen(n, 0);
  std::vector<std::uint32_t> touched;
  std::vector<std::uint32_t> cand;
  std::vector<double> gains;

  for (const auto v : order) {
    if (refined[v] != v || nonsingleton[v]) continue;
    const auto c = cl[v];
    if (ext[v] < gamma * net.nw[v] * (cluster_w[c] - net.nw[v])) continue;

    touched.clear();
    for (auto e = net.off[v]; e < net.off[v + 1]; ++e) {
      const auto u = net.nbr[e];
      if (cl[u] != c) continue;
      const auto r = refined[u];
      if (!seen[r]) {
        seen[r] = 1;
        touched.push_back(r);
      }
      ew[r] += net.w[e];
    }
    std::sort(touched.begin(), touched.end());

    cand.assign(1, v);
    gains.assign(1, 0.0);
    double max_gain = 0.0;
    for (auto r : touched) {
      if (ext[r] < gamma * rw[r] * (cluster_w[c] - rw[r])) continue;
      const double g = ew[r] - gamma * net.nw[v] * rw[r];
      if (g < 0) continue;
      cand.push_back(r);
      gains.push_back(g);
      max_gain = std::max(max_gain, g);
    }

    std::uint32_t chosen = v;
    if (cand.size() > 1) {
      double total = 0.0;
      for (auto& g : gains) {
        g = std::exp((g - max_gain) / theta);
        total += g;
      }
      const double pick = rng.uniform() * total;
      double run = 0.0;
      chosen = cand.back();
      for (std::size_t i = 0; i < cand.size(); ++i) {
        run += gains[i];
        if (pick < run) {
          chosen = cand[i];
          break;
        }
      }
    }
    if (chosen != v) {
      refined[v] = chosen;
      rw[chosen] += net.nw[v];
      rw[v] = 0.0;
      ext[chosen] = ext[chosen] + ext[v] - 2.0 * ew[chosen];
      nonsingleton[chosen] = 1;
    }
    for (auto r : touched) {
      ew[r] = 0.0;
      seen[r] = 0;
    }
  }
  return refined;
}

std::vector<std::uint32_t> leiden_iteration(const Net& base, std::vector<std::uint32_t> cl,
                                            double gamma, double theta, Rng& rng) {
  std::vector<std::uint32_t> map(base.n());
  std::iota(map.begin(), map.end(), 0u);
  const Net* cur = &base;
  Net storage;
  relabel(cl);
  while (true) {
    fast_local_move(*cur, cl, gamma, rng);
    const auto k = relabel(cl);
    if (k == cur->n()) break;
    auto refined = refine(*cur, cl, k, gamma, theta, rng);
    const auto kr = relabel(refined);
    if (kr == cur->n()) break;
    std::vector<std::uint32_t> agg_cl(kr);
    for (std::uint32_t v = 0; v < cur->n(); ++v) agg_cl[refined[v]] = cl[v];
    for (auto& m : map) m = refined[m];
    Net next = aggregate(*cur, refined, kr);
    storage = std::move(next);
    cur = &storage;
    cl = std::move(agg_cl);
  }
  std::vector<std::uint32_t> out(base.n());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = cl[map[i]];
  return out;
}

// Splits clusters into their connected components over positive-weight
// edges. Never lowers CPM quality.
void split_disconnected(const WeightedGraph& g, std::vector<std::uint32_t>& cl) {
  const auto n = g.node_count();
  std::vector<std::uint32_t> comp(n, UINT32_MAX);
  std::uint32_t next = 0;
  std::vector<std::uint32_t> stack;
  for (std::uint32_t s = 0; s < n; ++s) {
    if (comp[s] != UINT32_MAX) continue;
    comp[s] = next;
    stack.assign(1, s);
    while (!stack.empty()) {
      const auto v = stack.back();
      stack.pop_back();
      for (const auto& nb : g.neighbors(v)) {
        if (nb.weight > 0 && cl[nb.node] == cl[s] && comp[nb.node] == UINT32_MAX) {
          comp[nb.node] = next;
          stack.push_back(nb.node);
        }
      }
    }
    ++next;
  }
  cl = std::move(comp);
}

}  // namespace

double cpm_quality(const WeightedGraph& graph, const Partition& partition, double resolution) {
  if (partition.assignment.size() != graph.node_count()) {
    throw Error("partition size does not match graph");
  }
  const auto k = partition.cluster_count();
  std::vector<double> internal(k, 0.0), size(k, 0.0);
  for (const auto& e : graph.edges()) {
    if (partition.assignment[e.u] == partition.assignment[e.v]) {
      internal[partition.assignment[e.u]] += e.weight;
    }
  }
  for (std::uint32_t i = 0; i < graph.node_count(); ++i) {
    size[partition.assignment[i]] += graph.node_weight(i);
  }
  double h = 0.0;
  for (std::uint32_t c = 0; c < k; ++c) {
    h += internal[c] - resolution * size[c] * (size[c] - 1.0) / 2.0;
  }
  return h;
}

Partition canonical_order(const WeightedGraph& graph, const Partition& partition) {
  const auto k = partition.cluster_count();
  std::vector<double> size(k, 0.0);
  std::vector<std::uint32_t> first(k, UINT32_MAX);
  for (std::uint32_t i = 0; i < partition.assignment.size(); ++i) {
    const auto c = partition.assignment[i];
    size[c] += graph.node_weight(i);
    first[c] = std::min(first[c], i);
  }
  std::vector<std::uint32_t> ids;
  for (std::uint32_t c = 0; c < k; ++c) {
    if (first[c] != UINT32_MAX) ids.push_back(c);
  }
  std::sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (size[a] != size[b]) return size[a] > size[b];
    return first[a] < first[b];
  });
  std::vector<std::uint32_t> rank(k, 0);
  for (std::uint32_t r = 0; r < ids.size(); ++r) rank[ids[r]] = r;
  Partition out;
  out.assignment.reserve(partition.assignment.size());
  for (auto c : partition.assignment) out.assignment.push_back(rank[c]);
  return out;
}

Partition leiden(const WeightedGraph& graph, const LeidenOptions& options) {
  if (options.resolution <= 0) throw Error("resolution must be positive");
  if (options.max_iterations < 1) throw Error("max_iterations must be at least 1");
  const auto n = graph.node_count();
  if (n == 0) return {};
  const Net base = from_graph(graph);
  Rng rng(options.seed);

  Partition best = Partition::singletons(n);
  double best_q = cpm_quality(graph, best, options.resolution);
  for (int it = 0; it < options.max_iterations; ++it) {
    auto cl = leiden_iteration(base, best.assignment, options.resolution, options.randomness, rng);
    split_disconnected(graph, cl);
    Partition next = canonical_order(graph, Partition{std::move(cl)});
    const double q = cpm_quality(graph, next, options.resolution);
    if (!(q > best_q) || next == best) break;
    best = std::move(next);
    best_q = q;
  }
  return canonical_order(graph, best);
}

Reassignment reassign_small_clusters(const WeightedGraph& graph, const Partition& partition,
                                     double min_size) {
  const auto n = graph.node_count();
  if (partition.assignment.size() != n) throw Error("partition size does not match graph");
  Reassignment out;
  if (n == 0) return out;
  if (graph.total_node_weight() < min_size) {
    out.partition.assignment.assign(n, 0);
    return out;
  }
  const auto k = partition.cluster_count();
  std::vector<double> size(k, 0.0);
  for (std::uint32_t i = 0; i < n; ++i) size[partition.assignment[i]] += graph.node_weight(i);
  std::vector<char> qualifies(k, 0);
  bool any = false;
  for (std::uint32_t c = 0; c < k; ++c) {
    qualifies[c] = size[c] >= min_size;
    any = any || qualifies[c];
  }
  if (!any) {
    out.partition.assignment.assign(n, 0);
    return out;
  }

  constexpr std::uint32_t kUnplaced = UINT32_MAX;
  std::vector<std::uint32_t> cur(n);
  for (std::uint32_t i = 0; i < n; ++i) {
    cur[i] = qualifies[partition.assignment[i]] ? partition.assignment[i] : kUnplaced;
  }

  // Passes read the state at their start, so the outcome does not depend on
  // node order within a pass.
  std::map<std::uint32_t, double> to;
  while (true) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> moves;
    for (std::uint32_t v = 0; v < n; ++v) {
      if (cur[v] != kUnplaced) continue;
      to.clear();
      for (const auto& nb : graph.neighbors(v)) {
        if (cur[nb.node] != kUnplaced) to[cur[nb.node]] += nb.weight;
      }
      std::uint32_t best = kUnplaced;
      double best_w = 0.0;
      for (const auto& [c, w] : to) {
        if (w > best_w) {
          best = c;
          best_w = w;
        }
      }
      if (best != kUnplaced) moves.emplace_back(v, best);
    }
    if (moves.empty()) break;
    for (const auto& [v, c] : moves) cur[v] = c;
  }

  // Nodes without any path to a qualifying cluster follow their original
  // cluster's strongest relation, or land in the unassigned cluster.
  std::map<std::uint32_t, std::map<std::uint32_t, double>> relation;
  for (const auto& e : graph.edges()) {
    const auto a = partition.assignment[e.u];
    const auto b = partition.assignment[e.v];
    if (!qualifies[a] && cur[e.v] != kUnplaced && cur[e.v] != a) relation[a][cur[e.v]] += e.weight;
    if (!qualifies[b] && cur[e.u] != kUnplaced && cur[e.u] != b) relation[b][cur[e.u]] += e.weight;
  }
  const std::uint32_t unassigned_id = k;
  bool used_unassigned = false;
  for (std::uint32_t v = 0; v < n; ++v) {
    if (cur[v] != kUnplaced) continue;
    const auto orig = partition.assignment[v];
    std::uint32_t best = unassigned_id;
    double best_w = 0.0;
    if (const auto it = relation.find(orig); it != relation.end()) {
      for (const auto& [c, w] : it->second) {
        if (w > best_w) {
          best = c;
          best_w = w;
        }
      }
    }
    cur[v] = best;
    used_unassigned = used_unassigned || best == unassigned_id;
  }

  // Qualifying clusters by size, unassigned last.
  Partition placed{cur};
  std::vector<double> new_size(k + 1, 0.0);
  std::vector<std::uint32_t> first(k + 1, UINT32_MAX);
  for (std::uint32_t i = 0; i < n; ++i) {
    new_size[cur[i]] += graph.node_weight(i);
    first[cur[i]] = std::min(first[cur[i]], i);
  }
  std::vector<std::uint32_t> ids;
  for (std::uint32_t c = 0; c < k; ++c) {
    if (first[c] != UINT32_MAX) ids.push_back(c);
  }
  std::sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (new_size[a] != new_size[b]) return new_size[a] > new_size[b];
    return first[a] < first[b];
  });
  if (used_unassigned) ids.push_back(unassigned_id);
  std::vector<std::uint32_t> rank(k + 1, 0);
  for (std::uint32_t r = 0; r < ids.size(); ++r) rank[ids[r]] = r;
  out.partition.assignment.resize(n);
  for (std::uint32_t i = 0; i < n; ++i) out.partition.assignment[i] = rank[cur[i]];
  if (used_unassigned) out.unassigned = static_cast<std::uint32_t>(ids.size() - 1);
  return out;
}

Partition merge_small_clusters(const WeightedGraph& meta_graph, const Partition& partition,
                               double min_size) {
  const auto k = partition.cluster_count();
  if (meta_graph.node_count() != k) {
    throw Error("meta-graph has " + std::to_string(meta_graph.node_count()) + " nodes, partition has " +
                std::to_string(k) + " clusters");
  }
  std::vector<double> size = meta_graph.node_weights();
  // Total (not averaged) relation between live clusters.
  std::vector<std::map<std::uint32_t, double>> rel(k);
  for (const auto& e : meta_graph.edges()) {
    const double total = e.weight * size[e.u] * size[e.v];
    if (total <= 0) continue;
    rel[e.u][e.v] += total;
    rel[e.v][e.u] += total;
  }
  std::vector<std::uint32_t> target(k);
  std::iota(target.begin(), target.end(), 0u);
  std::vector<char> alive(k, 1);
  std::size_t live = k;

  while (live > 1) {
    std::uint32_t s = UINT32_MAX;
    for (std::uint32_t c = 0; c < k; ++c) {
      if (alive[c] && size[c] < min_size && (s == UINT32_MAX || size[c] < size[s])) s = c;
    }
    if (s == UINT32_MAX) break;

    auto pick = [&](bool big_only) {
      std::uint32_t best = UINT32_MAX;
      double best_r = 0.0;
      for (const auto& [c, w] : rel[s]) {
        if (big_only && size[c] < min_size) continue;
        const double r = w / (size[s] * size[c]);
        if (r > best_r) {
          best = c;
          best_r = r;
        }
      }
      return best;
    };
    std::uint32_t t = pick(true);
    if (t == UINT32_MAX) t = pick(false);
    if (t == UINT32_MAX) {
      for (std::uint32_t c = 0; c < k; ++c) {
        if (alive[c] && c != s && (t == UINT32_MAX || size[c] > size[t])) t = c;
      }
    }

    for (const auto& [c, w] : rel[s]) {
      rel[c].erase(s);
      if (c == t) continue;
      rel[t][c] += w;
      rel[c][t] += w;
    }
    rel[t].erase(s);
    rel[s].clear();
    size[t] += size[s];
    size[s] = 0.0;
    alive[s] = 0;
    target[s] = t;
    --live;
  }

  for (std::uint32_t c = 0; c < k; ++c) {
    auto r = c;
    while (target[r] != r) r = target[r];
    target[c] = r;
  }
  std::vector<double> final_size(k, 0.0);
  std::vector<std::uint32_t> first(k, UINT32_MAX);
  for (std::uint32_t c = 0; c < k; ++c) {
    final_size[target[c]] += meta_graph.node_weight(c);
    first[target[c]] = std::min(first[target[c]], c);
  }
  std::vector<std::uint32_t> ids;
  for (std::uint32_t c = 0; c < k; ++c) {
    if (alive[c]) ids.push_back(c);
  }
  std::sort(ids.begin(), ids.end(), [&](std::uint32_t a, std::uint32_t b) {
    if (final_size[a] != final_size[b]) return final_size[a] > final_size[b];
    return first[a] < first[b];
  });
  std::vector<std::uint32_t> rank(k, 0);
  for (std::uint32_t r = 0; r < ids.size(); ++r) rank[ids[r]] = r;
  Partition out;
  out.assignment.reserve(partition.assignment.size());
  for (auto c : partition.assignment) out.assignment.push_back(rank[target[c]]);
  return out;
}

}  // namespace sciatlas
