#include "sciatlas/layout.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "sciatlas/util.hpp"

namespace sciatlas {

LayoutParams LayoutParams::discipline_preset() {
  LayoutParams p;
  p.iterations = 10000;
  p.inertia = 0.1;
  p.repulsion_strength = 500;
  p.attraction_strength = 10;
  p.max_displacement = 10;
  p.freeze_balance = true;
  p.freeze_strength = 80;
  p.freeze_inertia = 0.2;
  p.gravity = 30;
  p.outbound_attraction = false;
  p.adjust_sizes = false;
  p.speed = 1;
  p.cooling = 1;
  return p;
}

LayoutParams LayoutParams::specialty_preset() {
  LayoutParams p = discipline_preset();
  p.repulsion_strength = 2000;
  p.attraction_strength = 20;
  p.gravity = 10;
  return p;
}

namespace {

constexpr double kMinDistance = 1e-2;

class QuadTree {
 public:
  QuadTree(std::span<const NodePosition> pos, std::span<const double> mass) : pos_(pos), mass_(mass) {
    double x0 = pos[0].x, x1 = x0, y0 = pos[0].y, y1 = y0;
    for (const auto& p : pos) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
    const double size = std::max({x1 - x0, y1 - y0, 1e-6}) * 1.0001;
    cells_.emplace_back(x0, y0, size);
    for (std::uint32_t i = 0; i < pos.size(); ++i) insert(0, i, 0);
    finalize(0);
  }

  /// Repulsion on body i, scaled by the body's own mass by the caller.
  void accumulate(std::uint32_t i, double theta, std::vector<std::size_t>& stack, double& fx,
                  double& fy) const {
    stack.assign(1, 0);
    while (!stack.empty()) {
      const auto& c = cells_[stack.back()];
      stack.pop_back();
      if (c.mass <= 0) continue;
      if (c.leaf) {
        for (auto b : c.bodies) {
          if (b != i) push(pos_[i], pos_[b].x, pos_[b].y, mass_[b], fx, fy);
        }
        continue;
      }
      const double dx = pos_[i].x - c.cx;
      const double dy = pos_[i].y - c.cy;
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d > 0 && c.size / d < theta && !inside(c, pos_[i])) {
        push(pos_[i], c.cx, c.cy, c.mass, fx, fy);
      } else {
        for (int k = 3; k >= 0; --k) {
          if (c.child[k] >= 0) stack.push_back(static_cast<std::size_t>(c.child[k]));
        }
      }
    }
  }

 private:
  struct Cell {
    Cell(double x, double y, double s) : x0(x), y0(y), size(s) {}
    double x0, y0, size;
    double cx = 0, cy = 0, mass = 0;
    int child[4] = {-1, -1, -1, -1};
    bool leaf = true;
    std::vector<std::uint32_t> bodies;
  };

  static bool inside(const Cell& c, const NodePosition& p) {
    return p.x >= c.x0 && p.x <= c.x0 + c.size && p.y >= c.y0 && p.y <= c.y0 + c.size;
  }

  static void push(const NodePosition& p, double qx, double qy, double m, double& fx, double& fy) {
    const double dx = p.x - qx;
    const double dy = p.y - qy;
    const double d = std::max(std::sqrt(dx * dx + dy * dy), kMinDistance);
    const double f = m / d;
    fx += f * dx / d;
    fy += f * dy / d;
  }

  int quadrant(const Cell& c, const NodePosition& p) const {
    const double h = c.size / 2;
    return (p.x >= c.x0 + h ? 1 : 0) + (p.y >= c.y0 + h ? 2 : 0);
  }

  void insert(std::size_t ci, std::uint32_t b, int depth) {
    if (cells_[ci].leaf) {
      cells_[ci].bodies.push_back(b);
      if (cells_[ci].bodies.size() <= 1 || depth >= 40) return;
      auto bodies = std::move(cells_[ci].bodies);
      cells_[ci].bodies.clear();
      cells_[ci].leaf = false;
      for (auto x : bodies) insert_child(ci, x, depth);
      return;
    }
    insert_child(ci, b, depth);
  }

  void insert_child(std::size_t ci, std::uint32_t b, int depth) {
    const int q = quadrant(cells_[ci], pos_[b]);
    if (cells_[ci].child[q] < 0) {
      const double h = cells_[ci].size / 2;
      cells_.emplace_back(cells_[ci].x0 + (q & 1 ? h : 0), cells_[ci].y0 + (q & 2 ? h : 0), h);
      cells_[ci].child[q] = static_cast<int>(cells_.size() - 1);
    }
    insert(static_cast<std::size_t>(cells_[ci].child[q]), b, depth + 1);
  }

  void finalize(std::size_t ci) {
    auto& c = cells_[ci];
    double m = 0, sx = 0, sy = 0;
    if (c.leaf) {
      for (auto b : c.bodies) {
        m += mass_[b];
        sx += mass_[b] * pos_[b].x;
        sy += mass_[b] * pos_[b].y;
      }
    } else {
      for (int k = 0; k < 4; ++k) {
        const int ch = cells_[ci].child[k];
        if (ch < 0) continue;
        finalize(static_cast<std::size_t>(ch));
        const auto& cc = cells_[static_cast<std::size_t>(ch)];
        m += cc.mass;
        sx += cc.mass * cc.cx;
        sy += cc.mass * cc.cy;
      }
    }
    auto& cell = cells_[ci];
    cell.mass = m;
    if (m > 0) {
      cell.cx = sx / m;
      cell.cy = sy / m;
    }
  }

  std::span<const NodePosition> pos_;
  std::span<const double> mass_;
  std::vector<Cell> cells_;
};

WeightedGraph normalized_copy(const WeightedGraph& g) {
  double max_w = 0;
  for (const auto& e : g.edges()) max_w = std::max(max_w, e.weight);
  if (max_w <= 0) return g;
  auto edges = g.edges();
  for (auto& e : edges) e.weight /= max_w;
  return WeightedGraph(g.node_weights(), std::move(edges));
}

void compute_forces(const WeightedGraph& g, const LayoutParams& p, std::span<const NodePosition> pos,
                    bool barnes_hut, std::vector<NodePosition>& force) {
  const auto n = g.node_count();
  std::vector<double> mass(n);
  for (std::uint32_t i = 0; i < n; ++i) mass[i] = static_cast<double>(g.degree(i)) + 1.0;
  force.assign(n, {});
  std::optional<QuadTree> tree;
  if (barnes_hut && n > 1) tree.emplace(pos, mass);

  parallel_for(n, p.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<std::size_t> stack;
    for (std::size_t ii = begin; ii < end; ++ii) {
      const auto i = static_cast<std::uint32_t>(ii);
      double fx = 0, fy = 0;
      if (tree) {
        double rx = 0, ry = 0;
        tree->accumulate(i, p.barnes_hut_theta, stack, rx, ry);
        fx += p.repulsion_strength * mass[i] * rx;
        fy += p.repulsion_strength * mass[i] * ry;
      } else {
        for (std::uint32_t j = 0; j < n; ++j) {
          if (j == i) continue;
          double dx = pos[i].x - pos[j].x;
          double dy = pos[i].y - pos[j].y;
          double d = std::sqrt(dx * dx + dy * dy);
          if (d == 0) {
            // Coincident nodes: separate along a fixed index-dependent direction.
            const double a = (i < j ? 1.0 : -1.0);
            dx = a * kMinDistance;
            dy = 0;
            d = kMinDistance;
          }
          const double dd = std::max(d, kMinDistance);
          const double f = p.repulsion_strength * mass[i] * mass[j] / dd;
          fx += f * dx / d;
          fy += f * dy / d;
        }
      }
      for (const auto& nb : g.neighbors(i)) {
        const double dx = pos[nb.node].x - pos[i].x;
        const double dy = pos[nb.node].y - pos[i].y;
        fx += p.attraction_strength * nb.weight * dx;
        fy += p.attraction_strength * nb.weight * dy;
      }
      const double d0 = std::sqrt(pos[i].x * pos[i].x + pos[i].y * pos[i].y);
      if (d0 > 0) {
        const double g_mag = p.gravity * mass[i] * std::min(1.0, d0);
        fx -= g_mag * pos[i].x / d0;
        fy -= g_mag * pos[i].y / d0;
      }
      force[i] = {fx, fy};
    }
  });
}

void validate(const LayoutParams& p) {
  if (p.iterations < 1) throw Error("layout iterations must be at least 1");
  if (p.repulsion_strength < 0 || p.attraction_strength < 0 || p.gravity < 0 || p.freeze_strength < 0) {
    throw Error("layout strengths must be non-negative");
  }
}

}  // namespace

std::vector<NodePosition> layout_forces(const WeightedGraph& graph, const LayoutParams& params,
                                        std::span<const NodePosition> pos, bool barnes_hut) {
  std::vector<NodePosition> f;
  compute_forces(graph, params, pos, barnes_hut, f);
  return f;
}

std::vector<NodePosition> force_atlas(const WeightedGraph& graph, const LayoutParams& params,
                                      std::uint64_t seed) {
  if (graph.node_count() == 0) throw Error("cannot lay out an empty graph");
  Rng rng(seed);
  std::vector<NodePosition> start(graph.node_count());
  for (auto& p : start) {
    p.x = rng.uniform(-params.initial_extent, params.initial_extent);
    p.y = rng.uniform(-params.initial_extent, params.initial_extent);
  }
  return force_atlas(graph, params, std::move(start));
}

std::vector<NodePosition> force_atlas(const WeightedGraph& graph, const LayoutParams& params,
                                      std::vector<NodePosition> pos) {
  validate(params);
  const auto n = graph.node_count();
  if (n == 0) throw Error("cannot lay out an empty graph");
  if (pos.size() != n) throw Error("start positions do not match the graph");
  const WeightedGraph g = params.normalize_weights ? normalized_copy(graph) : graph;
  const bool bh = n > params.barnes_hut_threshold;

  std::vector<NodePosition> prev(n), force;
  std::vector<double> freeze(n, 0.0);
  const int T = params.iterations;
  for (int t = 0; t < T; ++t) {
    compute_forces(g, params, pos, bh, force);
    const double cool = T > 1 ? 1.0 - 0.9 * params.cooling * static_cast<double>(t) / (T - 1) : 1.0;
    const double cap = params.max_displacement * std::max(cool, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double dx = params.inertia * prev[i].x + params.speed * force[i].x;
      double dy = params.inertia * prev[i].y + params.speed * force[i].y;
      if (params.freeze_balance) {
        const double ox = dx - prev[i].x;
        const double oy = dy - prev[i].y;
        const double swing = std::sqrt(std::sqrt(ox * ox + oy * oy));
        freeze[i] = params.freeze_inertia * freeze[i] +
                    (1.0 - params.freeze_inertia) * 0.1 * params.freeze_strength * swing;
        const double ratio = 1.0 / (1.0 + freeze[i]);
        dx *= ratio;
        dy *= ratio;
      }
      const double d = std::sqrt(dx * dx + dy * dy);
      if (d > cap && d > 0) {
        dx *= cap / d;
        dy *= cap / d;
      }
      pos[i].x += dx;
      pos[i].y += dy;
      prev[i] = {dx, dy};
    }
  }
  return pos;
}

WeightedGraph scale_sibling_edges(const WeightedGraph& graph, std::span<const std::uint32_t> parent,
                                  double factor) {
  if (parent.size() != graph.node_count()) throw Error("sibling map does not match the graph");
  auto edges = graph.edges();
  for (auto& e : edges) {
    if (parent[e.u] == parent[e.v]) e.weight *= factor;
  }
  return WeightedGraph(graph.node_weights(), std::move(edges));
}

std::vector<NodePosition> place_children(std::span<const NodePosition> raw, NodePosition parent, double m) {
  if (raw.empty()) throw Error("place_children needs at least one child");
  const double n = static_cast<double>(raw.size());
  double mx = 0, my = 0;
  for (const auto& p : raw) {
    mx += p.x;
    my += p.y;
  }
  mx /= n;
  my /= n;
  std::vector<NodePosition> out;
  out.reserve(raw.size());
  for (const auto& p : raw) {
    out.push_back({(p.x - mx) * m * (1.0 / n) + parent.x, (p.y - my) * m * (1.0 / n) + parent.y});
  }
  return out;
}

HierarchyLayout layout_graphs(const ClusterTree& tree, const WeightedGraph& publication_graph,
                              double sibling_factor) {
  const auto disc = tree.find_level("discipline");
  const auto spec = tree.find_level("specialty");
  if (!disc) throw Error("cluster tree has no 'discipline' level");
  if (!spec) throw Error("cluster tree has no 'specialty' level");
  if (*spec + 1 != *disc) throw Error("'specialty' must be the level directly below 'discipline'");

  HierarchyLayout out;
  out.discipline_level = *disc;
  out.specialty_level = *spec;
  const auto nd = tree.level(*disc).cluster_count();
  std::vector<std::uint32_t> parent(nd);
  if (*disc + 1 < tree.depth()) {
    parent = tree.level(*disc + 1).parent;
  } else {
    for (std::uint32_t i = 0; i < nd; ++i) parent[i] = i;
  }
  out.discipline_graph =
      scale_sibling_edges(level_graph(tree, publication_graph, *disc), parent, sibling_factor);
  out.specialty_graph = level_graph(tree, publication_graph, *spec);
  return out;
}

HierarchyLayout layout_hierarchy(const ClusterTree& tree, const WeightedGraph& publication_graph,
                                 const HierarchyLayoutOptions& options) {
  HierarchyLayout out = layout_graphs(tree, publication_graph, options.sibling_factor);
  const auto& dlvl = tree.level(out.discipline_level);
  const auto& slvl = tree.level(out.specialty_level);
  const auto nd = dlvl.cluster_count();
  out.disciplines = force_atlas(out.discipline_graph, options.discipline, derive_seed(options.seed, 1));

  out.specialties.assign(slvl.cluster_count(), {});
  std::vector<std::vector<std::uint32_t>> kids(nd);
  for (std::uint32_t s = 0; s < slvl.cluster_count(); ++s) kids[dlvl.parent[s]].push_back(s);

  std::vector<std::uint32_t> local(slvl.cluster_count(), UINT32_MAX);
  for (std::uint32_t d = 0; d < nd; ++d) {
    const auto& ks = kids[d];
    if (ks.empty()) continue;
    for (std::uint32_t i = 0; i < ks.size(); ++i) local[ks[i]] = i;
    std::vector<Edge> sub;
    for (auto s : ks) {
      for (const auto& nb : out.specialty_graph.neighbors(s)) {
        if (nb.node > s && dlvl.parent[nb.node] == d) sub.push_back({local[s], local[nb.node], nb.weight});
      }
    }
    std::vector<double> w;
    for (auto s : ks) w.push_back(out.specialty_graph.node_weight(s));
    const WeightedGraph sg(std::move(w), std::move(sub));
    const auto seed = derive_seed(options.seed, fnv1a(dlvl.paths[d]));
    const auto raw = force_atlas(sg, options.specialty, seed);
    const auto placed = place_children(raw, out.disciplines[d], options.expansion);
    for (std::uint32_t i = 0; i < ks.size(); ++i) out.specialties[ks[i]] = placed[i];
  }
  return out;
}

}  // namespace sciatlas
