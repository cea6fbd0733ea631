// Acceptance checks, one PASS/FAIL line per criterion. Exit status is the
// number of failed criteria.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>
#include <string>

#include "sciatlas/export.hpp"
#include "sciatlas/labeler.hpp"
#include "sciatlas/layout.hpp"
#include "sciatlas/leiden.hpp"
#include "sciatlas/mapbuild.hpp"
#include "sciatlas/overlay.hpp"
#include "sciatlas/pipeline.hpp"
#include "sciatlas/synth.hpp"
#include "sciatlas/util.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace sciatlas;
namespace fs = std::filesystem;

namespace {

const fs::path kFixture = SCIATLAS_FIXTURE_DIR;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome planted_partition() {
  Outcome o;
  double worst_nmi = 1, worst_time = 0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    std::vector<std::uint32_t> truth;
    const auto g = oracle::sbm(1000, 20, 0.3, 0.005, 1000 + seed, &truth);
    const auto wg = testkit::to_weighted(g);
    const auto t0 = std::chrono::steady_clock::now();
    // Planted within-block density is 0.3; half of it sits well above p_out.
    const auto p = leiden(wg, 0.15, seed);
    const double t = seconds_since(t0);
    const double score = oracle::nmi(p.assignment, truth);
    worst_nmi = std::min(worst_nmi, score);
    worst_time = std::max(worst_time, t);
    if (score < 0.95 || t >= 10) o.pass = false;
  }
  o.detail = fmt("min NMI %.4f over 10 seeds, slowest run %.3f s", worst_nmi, worst_time);
  return o;
}

Outcome cpm_oracle() {
  Outcome o;
  std::mt19937_64 rng(2024);
  int equal = 0, within = 0;
  double worst_ratio = 1;
  for (int i = 0; i < 100; ++i) {
    const std::size_t n = 2 + rng() % 7;
    auto g = oracle::random_connected(n, 0.4, rng, true);
    if (rng() % 2) {
      g.node_weight.resize(n);
      for (auto& w : g.node_weight) w = 1 + static_cast<double>(rng() % 3);
    }
    const double gamma = 0.05 + 0.05 * static_cast<double>(rng() % 10);
    const double best = oracle::best_cpm(g, gamma);
    const auto p = leiden(testkit::to_weighted(g), gamma, static_cast<std::uint64_t>(i));
    const double got = oracle::cpm(g, p.assignment, gamma);
    // Node weights above one make singletons negative, so the 5% tolerance
    // is taken relative to |best| rather than as a ratio.
    if (got >= best - 0.05 * std::abs(best) - 1e-12) ++within;
    if (std::abs(got - best) <= 1e-9 * std::max(1.0, std::abs(best))) ++equal;
    if (best > 0) worst_ratio = std::min(worst_ratio, got / best);
  }
  o.pass = within == 100 && equal >= 90;
  o.detail = fmt("%.0f/100 within 0.95 of the optimum, %.0f/100 equal, worst ratio %.4f", within, equal, worst_ratio);
  return o;
}

Outcome connectivity() {
  Outcome o;
  std::mt19937_64 rng(77);
  int bad = 0;
  std::size_t clusters = 0;
  for (int run = 0; run < 50; ++run) {
    oracle::Graph g;
    if (run % 2) {
      g = oracle::sbm(300, 5 + rng() % 20, 0.2, 0.01, rng(), nullptr);
    } else {
      g = oracle::random_connected(300, 0.01 + 0.02 * static_cast<double>(rng() % 3), rng, true);
    }
    const double gamma = 0.01 + 0.01 * static_cast<double>(rng() % 20);
    const auto p = leiden(testkit::to_weighted(g), gamma, rng());
    clusters += p.cluster_count();
    if (!oracle::clusters_connected(g, p.assignment)) ++bad;
  }
  o.pass = bad == 0;
  o.detail = fmt("%.0f of 50 runs with a disconnected cluster (%.0f clusters checked)", bad,
                 static_cast<double>(clusters));
  return o;
}

Corpus load_synthetic(std::size_t n, std::uint64_t seed) {
  SynthOptions so;
  so.publications = n;
  so.seed = seed;
  const auto s = synthesize(so);
  Corpus c;
  for (std::size_t i = 0; i < n; ++i) c.add(s.records[i]);
  std::vector<CitationEdge> edges;
  for (const auto& [a, b] : s.raw_citations) {
    const auto x = c.find(a), y = c.find(b);
    if (x && y) edges.push_back({*x, *y});
  }
  c.set_citations(std::move(edges));
  return c;
}

Outcome min_size_and_nesting() {
  Outcome o;
  const auto cfg = load_config(kFixture / "pipeline.json");
  std::size_t undersized = 0, nesting = 0, conservation = 0, levels = 0;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto c = load_synthetic(5000, seed);
    const auto tree = build_hierarchy(c, build_normalized_graph(c), cfg.levels, {seed, 100});
    for (std::size_t li = 0; li < tree.depth(); ++li) {
      ++levels;
      const auto& lvl = tree.level(li);
      const auto assign = tree.publication_assignment(li);
      std::vector<std::int64_t> recount(lvl.cluster_count(), 0);
      for (auto a : assign) ++recount[a];
      if (recount != lvl.sizes) ++conservation;
      std::int64_t total = 0;
      for (auto s : recount) total += s;
      if (total != static_cast<std::int64_t>(c.size())) ++conservation;
      for (auto s : recount) {
        if (s > 0 && static_cast<double>(s) < lvl.spec.min_size && lvl.cluster_count() > 1) ++undersized;
      }
      if (li > 0) {
        const auto finer = tree.publication_assignment(li - 1);
        std::map<std::uint32_t, std::uint32_t> up;
        for (std::size_t p = 0; p < c.size(); ++p) {
          if (up.emplace(finer[p], assign[p]).first->second != assign[p]) {
            ++nesting;
            break;
          }
        }
      }
    }
  }
  o.pass = undersized == 0 && nesting == 0 && conservation == 0;
  o.detail = fmt("%.0f undersized clusters, %.0f nesting breaks, ", static_cast<double>(undersized),
                 static_cast<double>(nesting)) +
             fmt("%.0f count mismatches across %.0f levels", static_cast<double>(conservation),
                 static_cast<double>(levels));
  return o;
}

Outcome size_formula() {
  Outcome o;
  const double s = node_size(31763, MapLevel::kDiscipline);
  std::mt19937_64 rng(5);
  double worst = 0;
  for (int i = 0; i < 10000; ++i) {
    const double n = static_cast<double>(rng() % 5000000);
    worst = std::max(worst, std::abs(node_size(n, MapLevel::kSpecialty) - node_size(n, MapLevel::kDiscipline) / 2));
  }
  o.pass = std::abs(s - 178.2) <= 0.05 && worst <= 1e-6;
  o.detail = fmt("31763 -> %.4f, worst specialty rescale error %.2e", s, worst);
  return o;
}

Outcome placement_centroid() {
  Outcome o;
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(-1e4, 1e4);
  double worst = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::size_t n = 1 + rng() % 60;
    std::vector<NodePosition> raw(n);
    for (auto& p : raw) p = {u(rng), u(rng)};
    const NodePosition parent{u(rng), u(rng)};
    const auto placed = place_children(raw, parent, 0.5);
    double mx = 0, my = 0;
    for (const auto& p : placed) {
      mx += p.x;
      my += p.y;
    }
    worst = std::max({worst, std::abs(mx / n - parent.x), std::abs(my / n - parent.y)});
  }
  bool single_exact = true;
  for (int i = 0; i < 100; ++i) {
    const NodePosition parent{u(rng), u(rng)};
    const auto one = place_children(std::vector<NodePosition>{{u(rng), u(rng)}}, parent, 0.5);
    single_exact = single_exact && one.front() == parent;
  }
  o.pass = worst <= 1e-9 && single_exact;
  o.detail = fmt("worst centroid offset %.2e over 1000 sets, single child exact: ", worst) +
             (single_exact ? "yes" : "no");
  return o;
}

Outcome hyperlink_batching() {
  Outcome o;
  std::vector<std::string> ids;
  int wrong = 0;
  for (std::size_t n = 1; n <= 5600; ++n) {
    ids.push_back(std::to_string(n));
    if (n % 7 && n != 500 && n != 501 && n != 5000 && n != 5001) continue;
    const auto h = make_hyperlinks(ids);
    if (n <= 500) {
      wrong += !(h.links.size() == 1 && !h.sentinel);
    } else if (n <= 5000) {
      wrong += !(h.links.size() == (n + 499) / 500 && !h.sentinel);
    } else {
      wrong += !(h.links.empty() && h.sentinel == "Too many publ. (" + std::to_string(n) + ")");
    }
  }
  std::vector<std::string> a(ids.begin(), ids.begin() + 3825);
  const auto h3825 = make_hyperlinks(a);
  const bool ok3825 = h3825.links.size() == 8 && h3825.links.back().label == "3501-3825";
  std::vector<std::string> big;
  for (int i = 0; i < 31763; ++i) big.push_back(std::to_string(i + 1));
  const auto hbig = make_hyperlinks(big);
  const bool okbig = hbig.sentinel == "Too many publ. (31763)";
  o.pass = wrong == 0 && ok3825 && okbig;
  o.detail = fmt("%.0f wrong batch counts; 3825 -> %.0f batches, last ", wrong,
                 static_cast<double>(h3825.links.size())) +
             (h3825.links.empty() ? "-" : h3825.links.back().label) + "; 31763 -> " +
             hbig.sentinel.value_or("no sentinel");
  return o;
}

Outcome tfs_orderings() {
  Outcome o;
  std::mt19937_64 rng(8);
  int mismatches = 0;
  for (int round = 0; round < 100; ++round) {
    TermStats stats;
    std::vector<std::string> vocab;
    stats.per_cluster.resize(2);
    const std::uint32_t terms = 12 + rng() % 30;
    for (std::uint32_t t = 0; t < terms; ++t) {
      vocab.push_back("w" + std::to_string(rng() % 100000) + "_" + std::to_string(t));
      const std::uint64_t in = 1 + rng() % 15, out = rng() % 40;
      stats.total.push_back(in + out);
      stats.per_cluster[0].emplace_back(t, in);
      if (out) stats.per_cluster[1].emplace_back(t, out);
    }
    auto tf = [&](std::uint32_t t) { return stats.per_cluster[0][t].second; };
    std::vector<std::uint32_t> freq(terms), spec(terms);
    std::iota(freq.begin(), freq.end(), 0u);
    std::iota(spec.begin(), spec.end(), 0u);
    std::sort(freq.begin(), freq.end(), [&](auto a, auto b) {
      return tf(a) != tf(b) ? tf(a) > tf(b) : vocab[a] < vocab[b];
    });
    std::sort(spec.begin(), spec.end(), [&](auto a, auto b) {
      const auto l = tf(a) * stats.total[b], r = tf(b) * stats.total[a];
      if (l != r) return l > r;
      return tf(a) != tf(b) ? tf(a) > tf(b) : vocab[a] < vocab[b];
    });
    for (auto [alpha, order] : {std::pair{1.0, &freq}, std::pair{0.0, &spec}}) {
      const auto label = label_cluster(0, stats, vocab, alpha, 1, {}, "1");
      std::vector<std::string> got = split(label.label, ';');
      for (auto& s : got) s = std::string(trim(s));
      got.insert(got.end(), label.additional_terms.begin(), label.additional_terms.end());
      for (std::size_t i = 0; i < got.size(); ++i) mismatches += got[i] != vocab[(*order)[i]];
      mismatches += got.size() != std::min<std::size_t>(10, terms);
    }
  }
  const double spot = tfs_score(8, 10, 0.5);
  o.pass = mismatches == 0 && std::abs(spot - std::sqrt(6.4)) <= 1e-9;
  o.detail = fmt("%.0f ranking mismatches over 100 tables; tfs(8, 10, 0.5) - sqrt(6.4) = %.1e", mismatches,
                 spot - std::sqrt(6.4));
  return o;
}

Outcome overlay_recount() {
  Outcome o;
  std::mt19937_64 rng(9);
  double worst = 0;
  int count_errors = 0, geometry = 0;
  testkit::TempDir dir("acc-overlay");
  for (int round = 0; round < 30; ++round) {
    const auto corpus = testkit::random_corpus(200, 3, rng);
    const auto tree = testkit::random_tree(200, 20, 8, 3, 2, rng);
    const auto base = testkit::plain_map(tree, rng);
    const auto membership = map_membership(base, tree);
    const auto dl = *tree.find_level("discipline"), sl = *tree.find_level("specialty");
    const auto da = tree.publication_assignment(dl), sa = tree.publication_assignment(sl);
    auto members = [&](const MapNode& n) {
      std::vector<std::uint32_t> out;
      const auto li = n.level == MapLevel::kDiscipline ? dl : sl;
      const auto& assign = n.level == MapLevel::kDiscipline ? da : sa;
      for (std::uint32_t p = 0; p < 200; ++p) {
        if (tree.level(li).paths[assign[p]] == n.id) out.push_back(p);
      }
      return out;
    };
    const auto oa = color_by_metric(base, membership, open_access_metric(corpus), Gradient::standard(),
                                    DenominatorRule::kAllMembers);
    std::vector<std::uint32_t> focal;
    for (std::uint32_t p = 0; p < 200; ++p) {
      if (rng() % 3 == 0) focal.push_back(p);
    }
    const auto cited = cited_by_overlay(base, membership, corpus, focal);
    std::vector<int> links(200, 0);
    for (const auto& e : corpus.citations()) {
      if (std::binary_search(focal.begin(), focal.end(), e.citing)) ++links[e.cited];
    }
    for (std::size_t i = 0; i < base.nodes.size(); ++i) {
      const auto mem = members(base.nodes[i]);
      double open = 0, hit = 0, cit = 0;
      for (auto p : mem) {
        const auto s = corpus[p].oa_status;
        open += s == OaStatus::kGold || s == OaStatus::kGreen || s == OaStatus::kBronze || s == OaStatus::kHybrid;
        if (links[p]) {
          cit += 1;
          hit += links[p];
        }
      }
      if (!mem.empty()) worst = std::max(worst, std::abs(oa.nodes[i].overlay_value.value_or(-1) - open / mem.size()));
      if (cit > 0) worst = std::max(worst, std::abs(cited.nodes[i].overlay_value.value_or(-1) - hit / cit));
      count_errors += cited.nodes[i].overlay_count != static_cast<std::int64_t>(cit);
      count_errors += oa.nodes[i].overlay_count != static_cast<std::int64_t>(mem.size());
    }
    // Coordinates in the written bundles.
    write_map(base, {}, dir / "base");
    write_map(oa, {}, dir / "oa");
    write_map(cited, {}, dir / "cited");
    auto coords = [](const fs::path& p) {
      const auto j = nlohmann::json::parse(slurp(p / "data.json"));
      std::string out;
      for (const auto& n : j["nodes"]) out += n["id"].dump() + n["x"].dump() + n["y"].dump() + ";";
      return out;
    };
    const auto ref = coords(dir / "base");
    geometry += coords(dir / "oa") != ref;
    geometry += coords(dir / "cited") != ref;
  }
  o.pass = worst <= 1e-12 && count_errors == 0 && geometry == 0;
  o.detail = fmt("worst value error %.2e over 30 corpora, %.0f count errors, %.0f bundles with moved nodes", worst,
                 count_errors, geometry);
  return o;
}

std::map<std::string, std::string> bundle_files(const fs::path& out) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), out).generic_string();
    if (rel.starts_with("work/")) continue;
    files[rel] = slurp(e.path());
  }
  return files;
}

PipelineConfig fixture_config(const fs::path& out, int threads) {
  return load_config(kFixture / "pipeline.json",
                     {"output_dir=" + nlohmann::json(out.string()).dump(), "threads=" + std::to_string(threads)});
}

Outcome determinism() {
  Outcome o;
  testkit::TempDir dir("acc-determinism");
  run_all(fixture_config(dir / "t1a", 1));
  run_all(fixture_config(dir / "t1b", 1));
  run_all(fixture_config(dir / "t4", 4));
  const auto a = bundle_files(dir / "t1a");
  const auto b = bundle_files(dir / "t1b");
  const auto c = bundle_files(dir / "t4");
  std::size_t differing = 0;
  for (const auto& [name, text] : a) {
    differing += !b.contains(name) || b.at(name) != text;
    differing += !c.contains(name) || c.at(name) != text;
  }
  o.pass = !a.empty() && a.size() == b.size() && a.size() == c.size() && differing == 0;
  o.detail = fmt("%.0f bundle files compared across threads 1, 1 and 4; %.0f differ", static_cast<double>(a.size()),
                 static_cast<double>(differing));
  return o;
}

Outcome end_to_end() {
  Outcome o;
  testkit::TempDir dir("acc-e2e");
  const auto config = fixture_config(dir / "out", 1);
  const auto t0 = std::chrono::steady_clock::now();
  run_all(config);
  const double t = seconds_since(t0);
  std::vector<fs::path> bundles = {dir / "out" / "bundle"};
  for (const auto& r : config.overlays) bundles.push_back(dir / "out" / "overlays" / r.name);
  int invalid = 0;
  std::size_t nodes = 0;
  for (const auto& b : bundles) {
    const auto report = validate_bundle(b);
    if (!report["valid"].get<bool>()) {
      ++invalid;
      std::fprintf(stderr, "%s\n", report.dump(2).c_str());
    }
    nodes = report["nodes"].get<std::size_t>();
  }
  const auto meta = nlohmann::json::parse(slurp(dir / "out" / "bundle" / "data.json"))["metadata"];
  o.pass = t < 60 && invalid == 0;
  o.detail = fmt("%.2f s for %.0f publications, %.0f citations; ", t, meta["publications"].get<double>(),
                 meta["citations"].get<double>()) +
             fmt("%.0f of %.0f bundles invalid, %.0f nodes", invalid, static_cast<double>(bundles.size()),
                 static_cast<double>(nodes));
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"planted partition recovery", planted_partition},
      {"CPM optimum on small graphs", cpm_oracle},
      {"connected clusters", connectivity},
      {"minimum sizes, nesting, conservation", min_size_and_nesting},
      {"node size formula", size_formula},
      {"placement centroid", placement_centroid},
      {"hyperlink batching", hyperlink_batching},
      {"TFS endpoint orderings", tfs_orderings},
      {"overlay recount and frozen coordinates", overlay_recount},
      {"determinism across thread counts", determinism},
      {"end-to-end fixture", end_to_end},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    failed += !r.pass;
    std::printf("%s %zu %s: %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, r.detail.c_str());
    std::fflush(stdout);
  }
  return failed;
}
