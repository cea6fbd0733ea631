#include "sciatlas/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "sciatlas/util.hpp"

namespace sciatlas {

using nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string_view to_string(OverlayMode m) {
  switch (m) {
    case OverlayMode::kSubsetSize: return "subset_size";
    case OverlayMode::kMetricColor: return "metric_color";
    case OverlayMode::kCitedBy: return "cited_by";
  }
  return "subset_size";
}

OverlayMode parse_overlay_mode(std::string_view s) {
  if (s == "subset_size") return OverlayMode::kSubsetSize;
  if (s == "metric_color") return OverlayMode::kMetricColor;
  if (s == "cited_by") return OverlayMode::kCitedBy;
  throw Error("unknown overlay mode '" + std::string(s) + "' (subset_size, metric_color, cited_by)");
}

std::string_view to_string(Stage s) {
  switch (s) {
    case Stage::kIngest: return "ingest";
    case Stage::kCluster: return "cluster";
    case Stage::kLabel: return "label";
    case Stage::kLayout: return "layout";
    case Stage::kBuild: return "build";
    case Stage::kExport: return "export";
  }
  return "ingest";
}

namespace {

// Typed access to one config object; keys never read are reported as
// unknown by finish().
class Section {
 public:
  Section(const ordered_json& j, std::string prefix) : j_(j), prefix_(std::move(prefix)) {
    if (!j.is_object()) throw Error("config key '" + name() + "' must be an object");
  }

  bool has(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  template <typename T>
  void get(const char* key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
      throw Error("config key '" + name(key) + "' has the wrong type: " + j_.at(key).dump());
    }
  }

  template <typename T>
  void get(const char* key, std::optional<T>& out) {
    if (!has(key) || j_.at(key).is_null()) return;
    T v{};
    get(key, v);
    out = v;
  }

  const ordered_json& at(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  std::string name(std::string_view key = {}) const {
    if (key.empty()) return prefix_;
    return prefix_.empty() ? std::string(key) : prefix_ + "." + std::string(key);
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (k == "comment" || k.starts_with("_")) continue;
      if (!seen_.contains(k)) throw Error("unknown config key '" + name(k) + "'");
    }
  }

 private:
  const ordered_json& j_;
  std::string prefix_;
  std::set<std::string, std::less<>> seen_;
};

fs::path resolve_path(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return (path.is_relative() ? base / path : path).lexically_normal();
}

void parse_layout_params(Section s, LayoutParams& p) {
  s.get("iterations", p.iterations);
  s.get("inertia", p.inertia);
  s.get("repulsion_strength", p.repulsion_strength);
  s.get("attraction_strength", p.attraction_strength);
  s.get("max_displacement", p.max_displacement);
  s.get("freeze_balance", p.freeze_balance);
  s.get("freeze_strength", p.freeze_strength);
  s.get("freeze_inertia", p.freeze_inertia);
  s.get("gravity", p.gravity);
  s.get("outbound_attraction", p.outbound_attraction);
  s.get("adjust_sizes", p.adjust_sizes);
  s.get("speed", p.speed);
  s.get("cooling", p.cooling);
  s.get("normalize_weights", p.normalize_weights);
  s.get("barnes_hut_threshold", p.barnes_hut_threshold);
  s.get("barnes_hut_theta", p.barnes_hut_theta);
  s.get("initial_extent", p.initial_extent);
  s.finish();
}

std::uint64_t file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  std::uint64_t h = fnv1a("");
  std::string buf(1 << 16, '\0');
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    h = fnv1a(std::string_view(buf.data(), static_cast<std::size_t>(in.gcount())), h);
  }
  return h;
}

void log(const RunOptions& o, Stage s, const std::string& msg) {
  if (o.log) *o.log << "[" << to_string(s) << "] " << msg << '\n';
}

void write_json_file(const fs::path& path, const ordered_json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

ordered_json levels_to_json(const std::vector<LevelSpec>& levels) {
  ordered_json arr = ordered_json::array();
  for (const auto& l : levels) {
    arr.push_back({{"name", l.name}, {"resolution", l.resolution}, {"min_size", l.min_size}, {"mode", to_string(l.mode)}});
  }
  return arr;
}

ordered_json layout_params_to_json(const LayoutParams& p) {
  return {{"iterations", p.iterations},
          {"inertia", p.inertia},
          {"repulsion_strength", p.repulsion_strength},
          {"attraction_strength", p.attraction_strength},
          {"max_displacement", p.max_displacement},
          {"freeze_balance", p.freeze_balance},
          {"freeze_strength", p.freeze_strength},
          {"freeze_inertia", p.freeze_inertia},
          {"gravity", p.gravity},
          {"outbound_attraction", p.outbound_attraction},
          {"adjust_sizes", p.adjust_sizes},
          {"speed", p.speed},
          {"cooling", p.cooling},
          {"normalize_weights", p.normalize_weights},
          {"barnes_hut_threshold", p.barnes_hut_threshold},
          {"barnes_hut_theta", p.barnes_hut_theta},
          {"initial_extent", p.initial_extent}};
}

PipelineConfig parse_config(const ordered_json& j, const fs::path& base_dir) {
  PipelineConfig c;
  Section top(j, "");
  for (const char* key : {"publications", "citations", "output_dir"}) {
    if (!top.has(key)) throw Error(std::string("missing required config key '") + key + "'");
  }
  std::string s;
  top.get("publications", s);
  c.publications = resolve_path(base_dir, s);
  top.get("citations", s);
  c.citations = resolve_path(base_dir, s);
  top.get("output_dir", s);
  c.output_dir = resolve_path(base_dir, s);
  std::optional<std::string> opt;
  top.get("pretagged", opt);
  if (opt) c.pretagged = resolve_path(base_dir, *opt);
  opt.reset();
  top.get("stoplist", opt);
  if (opt) c.stoplist = resolve_path(base_dir, *opt);

  if (top.has("years")) {
    Section y(top.at("years"), "years");
    y.get("first", c.years.first);
    y.get("last", c.years.last);
    y.finish();
    if (c.years.first > c.years.last) throw Error("config key 'years': first is after last");
  }
  bool strict = false;
  top.get("strict", strict);
  c.parse_mode = strict ? ParseMode::kStrict : ParseMode::kLenient;
  top.get("seed", c.seed);
  top.get("threads", c.threads);
  if (c.threads < 0) throw Error("config key 'threads' must be >= 0 (0 = all cores)");
  top.get("max_iterations", c.max_iterations);

  if (top.has("levels")) {
    const auto& arr = top.at("levels");
    if (!arr.is_array() || arr.empty()) throw Error("config key 'levels' must be a non-empty array");
    const auto defaults = default_level_specs();
    c.levels.clear();
    std::set<std::string> names;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section l(arr[i], "levels[" + std::to_string(i) + "]");
      LevelSpec spec;
      l.get("name", spec.name);
      if (spec.name.empty()) throw Error("config key '" + l.name("name") + "' is required");
      for (const auto& d : defaults) {
        if (d.name == spec.name) spec = d;
      }
      l.get("resolution", spec.resolution);
      l.get("min_size", spec.min_size);
      std::string mode(to_string(spec.mode));
      l.get("mode", mode);
      spec.mode = parse_small_cluster_mode(mode);
      l.finish();
      if (!names.insert(spec.name).second) throw Error("level '" + spec.name + "' is listed twice");
      c.levels.push_back(std::move(spec));
    }
  }

  if (top.has("labels")) {
    Section l(top.at("labels"), "labels");
    l.get("min_tf", c.labels.min_tf);
    l.get("max_phrase_length", c.labels.max_phrase_length);
    if (l.has("levels")) {
      const auto& lv = l.at("levels");
      if (!lv.is_object()) throw Error("config key 'labels.levels' must be an object");
      for (const auto& [name, v] : lv.items()) {
        Section ls(v, "labels.levels." + name);
        auto& lc = c.labels.levels[name];
        if (ls.has("fields")) {
          lc.fields.clear();
          for (const auto& f : ls.at("fields")) lc.fields.push_back(parse_text_field(f.get<std::string>()));
        }
        ls.get("alpha", lc.alpha);
        ls.finish();
        if (lc.fields.empty()) throw Error("config key 'labels.levels." + name + ".fields' is empty");
        if (!(lc.alpha >= 0 && lc.alpha <= 1)) throw Error("config key 'labels.levels." + name + ".alpha' outside [0, 1]");
      }
    }
    l.finish();
  }
  if (c.stoplist) c.labels.stoplist = load_stoplist(*c.stoplist);

  if (top.has("layout")) {
    Section l(top.at("layout"), "layout");
    if (l.has("discipline")) parse_layout_params(Section(l.at("discipline"), "layout.discipline"), c.layout.discipline);
    if (l.has("specialty")) parse_layout_params(Section(l.at("specialty"), "layout.specialty"), c.layout.specialty);
    l.get("sibling_factor", c.layout.sibling_factor);
    l.get("expansion", c.layout.expansion);
    l.finish();
  }
  if (top.has("map")) {
    Section m(top.at("map"), "map");
    m.get("link_base", c.map.link_base);
    m.get("top_k", c.map.top_k);
    m.finish();
  }
  if (top.has("bundle")) {
    Section b(top.at("bundle"), "bundle");
    b.get("title", c.bundle.title);
    b.get("description", c.bundle.description);
    b.get("show_disciplines", c.bundle.show_disciplines);
    b.get("show_specialties", c.bundle.show_specialties);
    b.get("max_zoom", c.bundle.max_zoom);
    b.get("min_zoom", c.bundle.min_zoom);
    b.get("label_zoom_threshold", c.bundle.label_zoom_threshold);
    b.finish();
  }
  if (top.has("open_access")) {
    Section o(top.at("open_access"), "open_access");
    bool unknown_is_closed = true;
    o.get("unknown_counts_as_closed", unknown_is_closed);
    c.unknown_oa_has_value = unknown_is_closed;
    o.finish();
  }
  if (top.has("overlays")) {
    const auto& arr = top.at("overlays");
    if (!arr.is_array()) throw Error("config key 'overlays' must be an array");
    std::set<std::string> names;
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Section o(arr[i], "overlays[" + std::to_string(i) + "]");
      OverlayRequest r;
      o.get("name", r.name);
      if (r.name.empty()) throw Error("config key '" + o.name("name") + "' is required");
      if (r.name.find_first_of("/\\") != std::string::npos || r.name == "." || r.name == "..") {
        throw Error("overlay name '" + r.name + "' must be a plain directory name");
      }
      if (!names.insert(r.name).second) throw Error("overlay '" + r.name + "' is listed twice");
      std::string mode = "subset_size";
      o.get("mode", mode);
      r.mode = parse_overlay_mode(mode);
      std::optional<std::string> p;
      o.get("subset", p);
      if (p) r.subset = resolve_path(base_dir, *p);
      p.reset();
      o.get("metric", p);
      if (p) r.metric = resolve_path(base_dir, *p);
      std::string denom = "all_members";
      o.get("denominator", denom);
      if (denom == "all_members") {
        r.denominator = DenominatorRule::kAllMembers;
      } else if (denom == "with_value_only") {
        r.denominator = DenominatorRule::kWithValueOnly;
      } else {
        throw Error("config key '" + o.name("denominator") + "' must be all_members or with_value_only");
      }
      std::vector<double> range;
      o.get("range", range);
      if (!range.empty()) {
        if (range.size() != 2) throw Error("config key '" + o.name("range") + "' must be [lo, hi]");
        r.range = {range[0], range[1]};
      }
      o.get("max_cited_year", r.max_cited_year);
      o.get("title", r.title);
      o.finish();
      if (r.mode != OverlayMode::kMetricColor && !r.subset) {
        throw Error("overlay '" + r.name + "' needs a 'subset' file");
      }
      c.overlays.push_back(std::move(r));
    }
  }
  top.finish();
  return c;
}

void apply_override(ordered_json& j, std::string_view assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string_view::npos || eq == 0) {
    throw Error("override '" + std::string(assignment) + "' must look like key=value");
  }
  const auto key = assignment.substr(0, eq);
  const std::string value(assignment.substr(eq + 1));
  ordered_json v;
  try {
    v = ordered_json::parse(value);
  } catch (const nlohmann::json::exception&) {
    v = value;
  }
  ordered_json* cur = &j;
  const auto parts = split(key, '.');
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!cur->is_object()) throw Error("override '" + std::string(key) + "' descends into a non-object");
    cur = &(*cur)[parts[i]];
    if (cur->is_null()) *cur = ordered_json::object();
  }
  if (!cur->is_object()) throw Error("override '" + std::string(key) + "' descends into a non-object");
  (*cur)[parts.back()] = std::move(v);
}

ordered_json read_config_json(const fs::path& file) {
  std::ifstream in(file);
  if (!in) throw InputError("cannot read config " + file.string());
  try {
    return ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw InputError("config " + file.string() + " is not valid JSON: " + e.what());
  }
}

PipelineConfig load_config(const fs::path& file, const std::vector<std::string>& overrides) {
  auto j = read_config_json(file);
  for (const auto& o : overrides) apply_override(j, o);
  return parse_config(j, file.has_parent_path() ? file.parent_path() : fs::path("."));
}

WorkPaths WorkPaths::of(const PipelineConfig& c) {
  WorkPaths w;
  w.work = c.output_dir / "work";
  w.corpus = w.work / "corpus.jsonl";
  w.citations = w.work / "citations.tsv";
  w.tree = w.work / "tree";
  w.labels = w.work / "labels.tsv";
  w.positions = w.work / "positions.tsv";
  w.basemap = w.work / "basemap.json";
  w.bundle = c.output_dir / "bundle";
  w.overlays = c.output_dir / "overlays";
  return w;
}

fs::path WorkPaths::stamp(Stage s) const { return work / (std::string(to_string(s)) + ".stamp.json"); }

fs::path WorkPaths::checkpoint(Stage s) const {
  switch (s) {
    case Stage::kIngest: return corpus;
    case Stage::kCluster: return tree / "clusters.tsv";
    case Stage::kLabel: return labels;
    case Stage::kLayout: return positions;
    case Stage::kBuild: return basemap;
    case Stage::kExport: return bundle / "data.json";
  }
  return corpus;
}

namespace {

std::vector<Stage> dependencies(Stage s) {
  switch (s) {
    case Stage::kIngest: return {};
    case Stage::kCluster: return {Stage::kIngest};
    case Stage::kLabel: return {Stage::kCluster};
    case Stage::kLayout: return {Stage::kCluster};
    case Stage::kBuild: return {Stage::kLabel, Stage::kLayout};
    case Stage::kExport: return {Stage::kBuild};
  }
  return {};
}

ordered_json stage_section(const PipelineConfig& c, Stage s) {
  switch (s) {
    case Stage::kIngest:
      return {{"publications", hex64(file_hash(c.publications))},
              {"citations", hex64(file_hash(c.citations))},
              {"years", {c.years.first, c.years.last}},
              {"strict", c.parse_mode == ParseMode::kStrict}};
    case Stage::kCluster:
      return {{"levels", levels_to_json(c.levels)}, {"max_iterations", c.max_iterations}, {"seed", c.seed}};
    case Stage::kLabel: {
      ordered_json levels = ordered_json::object();
      for (const auto& [name, lc] : c.labels.levels) {
        ordered_json fields = ordered_json::array();
        for (auto f : lc.fields) fields.push_back(to_string(f));
        levels[name] = {{"fields", fields}, {"alpha", lc.alpha}};
      }
      return {{"levels", levels},
              {"min_tf", c.labels.min_tf},
              {"max_phrase_length", c.labels.max_phrase_length},
              {"stoplist", c.labels.stoplist},
              {"pretagged", c.pretagged ? hex64(file_hash(*c.pretagged)) : ""}};
    }
    case Stage::kLayout:
      return {{"discipline", layout_params_to_json(c.layout.discipline)},
              {"specialty", layout_params_to_json(c.layout.specialty)},
              {"sibling_factor", c.layout.sibling_factor},
              {"expansion", c.layout.expansion},
              {"seed", c.seed}};
    case Stage::kBuild:
      return {{"link_base", c.map.link_base}, {"top_k", c.map.top_k}, {"title", c.bundle.title}};
    case Stage::kExport:
      return c.bundle.to_json();
  }
  return {};
}

std::string stage_hash_memo(const PipelineConfig& c, Stage s, std::map<Stage, std::string>& memo) {
  if (auto it = memo.find(s); it != memo.end()) return it->second;
  std::string deps;
  for (auto d : dependencies(s)) deps += stage_hash_memo(c, d, memo);
  const auto h = hex64(fnv1a(stage_section(c, s).dump(), fnv1a(deps)));
  memo[s] = h;
  return h;
}

void write_stamp(const PipelineConfig& c, const WorkPaths& w, Stage s, ordered_json summary) {
  write_json_file(w.stamp(s), {{"stage", to_string(s)},
                               {"hash", stage_hash(c, s)},
                               {"threads", resolve_threads(c.threads)},
                               {"summary", std::move(summary)}});
}

void require(const PipelineConfig& c, const WorkPaths& w, Stage s, const RunOptions& o, Stage running) {
  const auto cp = w.checkpoint(s);
  if (!fs::exists(cp)) {
    throw Error("missing checkpoint " + cp.string() + "; run '" + std::string(to_string(s)) + "' first");
  }
  std::string found;
  if (fs::exists(w.stamp(s))) {
    try {
      std::ifstream in(w.stamp(s));
      found = ordered_json::parse(in).value("hash", "");
    } catch (const nlohmann::json::exception&) {
    }
  }
  const auto expected = stage_hash(c, s);
  if (found == expected) return;
  const std::string what = "checkpoint " + cp.string() + " is stale: it was written with a different " +
                           "configuration or input (stamp " + (found.empty() ? "missing" : found) +
                           ", expected " + expected + ")";
  if (!o.force) throw Error(what + "; rerun '" + std::string(to_string(s)) + "' or pass --force");
  log(o, running, "warning: " + what + "; continuing because of --force");
}

Corpus load_work_corpus(const WorkPaths& w) {
  Corpus corpus = load_publications(w.corpus, std::nullopt, ParseMode::kStrict);
  load_citations(w.citations, corpus, ParseMode::kStrict);
  return corpus;
}

LayoutParams with_threads(LayoutParams p, int threads) {
  p.threads = threads;
  return p;
}

void run_ingest(const PipelineConfig& c, const WorkPaths& w, const RunOptions& o) {
  PublicationLoadReport pr;
  Corpus corpus = load_publications(c.publications, c.years, c.parse_mode, &pr);
  CitationLoadReport cr;
  load_citations(c.citations, corpus, c.parse_mode, &cr);
  for (const auto& msg : pr.warnings) log(o, Stage::kIngest, "warning: " + msg);
  for (const auto& msg : cr.warnings) log(o, Stage::kIngest, "warning: " + msg);
  log(o, Stage::kIngest,
      std::to_string(pr.loaded) + " publications (" + std::to_string(pr.skipped_year) + " outside years, " +
          std::to_string(pr.skipped_type) + " other types, " + std::to_string(pr.malformed) + " malformed), " +
          std::to_string(cr.kept) + " citations (" + std::to_string(cr.self_loops) + " self, " +
          std::to_string(cr.duplicates) + " duplicate, " + std::to_string(cr.dangling) + " dangling)");
  if (corpus.size() == 0) throw Error("no publications left after filtering " + c.publications.string());
  fs::create_directories(w.work);
  write_publications(w.corpus, corpus);
  write_citations(w.citations, corpus);
  write_stamp(c, w, Stage::kIngest,
              {{"publications", pr.loaded},
               {"skipped_year", pr.skipped_year},
               {"skipped_type", pr.skipped_type},
               {"malformed", pr.malformed},
               {"duplicate_ids", pr.duplicate_ids},
               {"citations", cr.kept},
               {"self_loops", cr.self_loops},
               {"duplicates", cr.duplicates},
               {"dangling", cr.dangling}});
}

void run_cluster(const PipelineConfig& c, const WorkPaths& w, const RunOptions& o) {
  require(c, w, Stage::kIngest, o, Stage::kCluster);
  const Corpus corpus = load_work_corpus(w);
  const auto graph = build_normalized_graph(corpus);
  const auto tree = build_hierarchy(corpus, graph, c.levels, {c.seed, c.max_iterations});
  fs::remove_all(w.tree);
  write_tree(w.tree, tree, corpus);
  ordered_json levels = ordered_json::array();
  for (const auto& lvl : tree.levels()) {
    log(o, Stage::kCluster, lvl.spec.name + ": " + std::to_string(lvl.cluster_count()) + " clusters");
    levels.push_back({{"name", lvl.spec.name}, {"clusters", lvl.cluster_count()}, {"unassigned", lvl.unassigned.has_value()}});
  }
  write_stamp(c, w, Stage::kCluster, {{"levels", levels}});
}

void run_label(const PipelineConfig& c, const WorkPaths& w, const RunOptions& o) {
  require(c, w, Stage::kIngest, o, Stage::kLabel);
  require(c, w, Stage::kCluster, o, Stage::kLabel);
  const Corpus corpus = load_work_corpus(w);
  const auto tree = read_tree(w.tree, corpus);
  std::optional<PretaggedCorpus> pre;
  if (c.pretagged) pre = load_pretagged(*c.pretagged);
  const auto terms = extract_terms(corpus, c.labels.max_phrase_length, resolve_threads(c.threads),
                                   pre ? &*pre : nullptr);
  const auto labels = label_tree(tree, terms, c.labels);
  write_labels(w.labels, tree, labels);
  log(o, Stage::kLabel, std::to_string(terms.vocabulary.size()) + " distinct terms");
  write_stamp(c, w, Stage::kLabel, {{"terms", terms.vocabulary.size()}});
}

void run_layout(const PipelineConfig& c, const WorkPaths& w, const RunOptions& o) {
  require(c, w, Stage::kIngest, o, Stage::kLayout);
  require(c, w, Stage::kCluster, o, Stage::kLayout);
  const Corpus corpus = load_work_corpus(w);
  const auto tree = read_tree(w.tree, corpus);
  const auto graph = build_normalized_graph(corpus);
  auto opts = c.layout;
  opts.seed = c.seed;
  const int threads = resolve_threads(c.threads);
  opts.discipline = with_threads(opts.discipline, threads);
  opts.specialty = with_threads(opts.specialty, threads);
  const auto layout = layout_hierarchy(tree, graph, opts);
  write_positions(w.positions, tree, layout);
  log(o, Stage::kLayout,
      std::to_string(layout.disciplines.size()) + " disciplines, " + std::to_string(layout.specialties.size()) +
          " specialties placed");
  write_stamp(c, w, Stage::kLayout, {{"disciplines", layout.disciplines.size()}, {"specialties", layout.specialties.size()}});
}

ordered_json area_legend(const ClusterTree& tree, const LabelSet& labels, std::size_t discipline_level) {
  ordered_json legend = ordered_json::array();
  const auto area = tree.find_level("research_area");
  if (!area) return legend;
  const auto& alvl = tree.level(*area);
  const auto up = tree.ancestor_map(discipline_level, *area);
  const auto& dlvl = tree.level(discipline_level);
  const auto& dlabels = labels.at(dlvl.spec.name);
  for (std::uint32_t a = 0; a < alvl.cluster_count(); ++a) {
    // Name the area after its largest discipline.
    std::optional<std::uint32_t> best;
    for (std::uint32_t d = 0; d < dlvl.cluster_count(); ++d) {
      if (up[d] == a && (!best || dlvl.sizes[d] > dlvl.sizes[*best])) best = d;
    }
    std::string label = "Research area " + alvl.paths[a];
    if (best) label += ": " + dlabels[*best].label;
    legend.push_back({{"label", label}, {"color", area_color(a, alvl.cluster_count())}});
  }
  return legend;
}

void run_build(const PipelineConfig& c, const WorkPaths& w, const RunOptions& o) {
  require(c, w, Stage::kLabel, o, Stage::kBuild);
  require(c, w, Stage::kLayout, o, Stage::kBuild);
  const Corpus corpus = load_work_corpus(w);
  const auto tree = read_tree(w.tree, corpus);
  const auto labels = read_labels(w.labels, tree);
  const auto graph = build_normalized_graph(corpus);
  auto layout = layout_graphs(tree, graph, c.layout.sibling_factor);
  read_positions(w.positions, tree, layout);
  BaseMap map = build_base_map(tree, labels, layout, corpus, c.map);

  int first = 0, last = 0;
  for (std::uint32_t i = 0; i < corpus.size(); ++i) {
    first = i == 0 ? corpus[i].year : std::min(first, corpus[i].year);
    last = i == 0 ? corpus[i].year : std::max(last, corpus[i].year);
  }
  ordered_json levels = levels_to_json(c.levels);
  for (auto& l : levels) {
    if (const auto li = tree.find_level(l["name"].get<std::string>())) l["clusters"] = tree.level(*li).cluster_count();
  }
  ordered_json meta;
  meta["title"] = c.bundle.title;
  meta["seed"] = c.seed;
  meta["config_hash"] = stage_hash(c, Stage::kBuild);
  meta["publications"] = corpus.size();
  meta["citations"] = corpus.citations().size();
  meta["years"] = {first, last};
  meta["levels"] = std::move(levels);
  meta["disciplines"] = map.metadata["disciplines"];
  meta["specialties"] = map.metadata["specialties"];
  meta["legend"] = area_legend(tree, labels, layout.discipline_level);
  map.metadata = std::move(meta);

  std::ofstream out(w.basemap, std::ios::binary);
  if (!out) throw Error("cannot write " + w.basemap.string());
  out << serialize_map(map);
  if (!out) throw Error("write failed: " + w.basemap.string());
  log(o, Stage::kBuild, std::to_string(map.nodes.size()) + " nodes, " + std::to_string(map.edges.size()) + " edges");
  write_stamp(c, w, Stage::kBuild, {{"nodes", map.nodes.size()}, {"edges", map.edges.size()}});
}

std::vector<LegendEntry> legend_from(const ordered_json& meta) {
  std::vector<LegendEntry> out;
  if (!meta.contains("legend")) return out;
  for (const auto& e : meta["legend"]) out.push_back({e.at("label").get<std::string>(), e.at("color").get<std::string>()});
  return out;
}

void write_checked(const BaseMap& map, const BundleConfig& config, const fs::path& dir, const RunOptions& o,
                   Stage stage) {
  fs::create_directories(dir);
  for (const char* f : {"data.json", "config.json", "index.html"}) fs::remove(dir / f);
  write_map(map, config, dir);
  const auto report = validate_bundle(dir);
  if (!report["valid"].get<bool>()) {
    std::string msg = "bundle " + dir.string() + " failed validation:";
    for (const auto& e : report["errors"]) msg += "\n  " + e.get<std::string>();
    throw Error(msg);
  }
  log(o, stage, "wrote " + dir.string());
}

void run_export(const PipelineConfig& c, const WorkPaths& w, const RunOptions& o) {
  require(c, w, Stage::kBuild, o, Stage::kExport);
  const auto map = read_map(w.basemap);
  BundleConfig config = c.bundle;
  config.legend = legend_from(map.metadata);
  write_checked(map, config, w.bundle, o, Stage::kExport);
  write_stamp(c, w, Stage::kExport, {{"bundle", w.bundle.string()}});
}

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

}  // namespace

std::string stage_hash(const PipelineConfig& config, Stage stage) {
  std::map<Stage, std::string> memo;
  return stage_hash_memo(config, stage, memo);
}

void run_stage(Stage stage, const PipelineConfig& config, const RunOptions& options) {
  const auto w = WorkPaths::of(config);
  switch (stage) {
    case Stage::kIngest: return run_ingest(config, w, options);
    case Stage::kCluster: return run_cluster(config, w, options);
    case Stage::kLabel: return run_label(config, w, options);
    case Stage::kLayout: return run_layout(config, w, options);
    case Stage::kBuild: return run_build(config, w, options);
    case Stage::kExport: return run_export(config, w, options);
  }
}

void run_overlay(const PipelineConfig& c, const OverlayRequest& r, const RunOptions& o) {
  const auto w = WorkPaths::of(c);
  require(c, w, Stage::kIngest, o, Stage::kExport);
  require(c, w, Stage::kCluster, o, Stage::kExport);
  require(c, w, Stage::kBuild, o, Stage::kExport);
  const Corpus corpus = load_work_corpus(w);
  const auto tree = read_tree(w.tree, corpus);
  const auto base = read_map(w.basemap);
  const auto membership = map_membership(base, tree);

  BundleConfig config = c.bundle;
  config.title = r.title.empty() ? c.bundle.title + " (" + r.name + ")" : r.title;
  BaseMap out;
  auto load_ids = [&](const char* what) {
    if (!r.subset) throw Error("overlay '" + r.name + "' needs a " + what + " file");
    const auto s = load_subset(*r.subset, corpus);
    if (s.unknown) {
      log(o, Stage::kExport, "overlay " + r.name + ": " + std::to_string(s.unknown) + " ids not in the corpus");
    }
    return s.members;
  };
  switch (r.mode) {
    case OverlayMode::kSubsetSize: {
      out = project_subset(base, membership, load_ids("subset"));
      config.legend = legend_from(base.metadata);
      break;
    }
    case OverlayMode::kMetricColor: {
      const auto metric = r.metric ? metric_from_file(load_metric(*r.metric, corpus), corpus.size())
                                   : open_access_metric(corpus, c.unknown_oa_has_value);
      const auto g = Gradient::standard();
      out = color_by_metric(base, membership, metric, g, r.denominator, r.range);
      config.legend = {{format_number(r.range.lo), g.at(0)}, {format_number(r.range.hi), g.at(1)}};
      break;
    }
    case OverlayMode::kCitedBy: {
      CitedByOptions opts;
      opts.max_cited_year = r.max_cited_year;
      out = cited_by_overlay(base, membership, corpus, load_ids("focal set"), opts);
      const double hi = out.metadata["overlay"]["range"][1].get<double>();
      config.legend = {{"1", opts.gradient.at(0)}, {format_number(hi), opts.gradient.at(1)}};
      break;
    }
  }
  out.metadata["overlay"]["name"] = r.name;
  config.gradient_stops = Gradient::standard().stops;
  write_checked(out, config, w.overlays / r.name, o, Stage::kExport);
}

void run_all(const PipelineConfig& config, const RunOptions& options) {
  for (auto s : kAllStages) run_stage(s, config, options);
  for (const auto& r : config.overlays) run_overlay(config, r, options);
}

void write_positions(const fs::path& path, const ClusterTree& tree, const HierarchyLayout& layout) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "# level\tcluster_path\tx\ty\n";
  auto rows = [&](std::size_t level, const std::vector<NodePosition>& pos) {
    const auto& lvl = tree.level(level);
    char buf[96];
    for (std::size_t c = 0; c < pos.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g\t%.17g", pos[c].x, pos[c].y);
      out << lvl.spec.name << '\t' << lvl.paths[c] << '\t' << buf << '\n';
    }
  };
  rows(layout.discipline_level, layout.disciplines);
  rows(layout.specialty_level, layout.specialties);
  if (!out) throw Error("write failed: " + path.string());
}

void read_positions(const fs::path& path, const ClusterTree& tree, HierarchyLayout& layout) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  std::map<std::pair<std::string, std::string>, NodePosition> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    const auto cols = split(line, '\t');
    if (cols.size() != 4) throw InputError(path.string() + ":" + std::to_string(lineno) + ": malformed row");
    try {
      rows[{cols[0], cols[1]}] = {std::stod(cols[2]), std::stod(cols[3])};
    } catch (const std::exception&) {
      throw InputError(path.string() + ":" + std::to_string(lineno) + ": bad coordinate");
    }
  }
  auto fill = [&](std::size_t level, std::vector<NodePosition>& pos) {
    const auto& lvl = tree.level(level);
    pos.assign(lvl.cluster_count(), {});
    for (std::size_t c = 0; c < lvl.cluster_count(); ++c) {
      const auto it = rows.find({lvl.spec.name, lvl.paths[c]});
      if (it == rows.end()) throw InputError(path.string() + ": no position for cluster " + lvl.paths[c]);
      pos[c] = it->second;
    }
  };
  fill(layout.discipline_level, layout.disciplines);
  fill(layout.specialty_level, layout.specialties);
}

}  // namespace sciatlas
