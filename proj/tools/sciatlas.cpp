// sciatlas command line: pipeline stages, overlays, validation, synthetic
// corpora and the remote citation client.

#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "sciatlas/export.hpp"
#include "sciatlas/pipeline.hpp"
#include "sciatlas/remote.hpp"
#include "sciatlas/synth.hpp"
#include "sciatlas/util.hpp"

namespace {

using namespace sciatlas;

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::optional<std::string> output_dir;
  std::vector<std::string> set;
  bool force = false;
  bool quiet = false;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("-c,--config", c.config, "pipeline.json")->required();
  app->add_option("--seed", c.seed, "override the seed");
  app->add_option("--threads", c.threads, "worker threads (0 = all cores)");
  app->add_option("--output-dir", c.output_dir, "override output_dir");
  app->add_option("--set", c.set, "override a config key, e.g. --set layout.sibling_factor=2");
  app->add_flag("--force", c.force, "accept stale checkpoints");
  app->add_flag("-q,--quiet", c.quiet, "no progress output");
}

PipelineConfig load(const Common& c) {
  auto overrides = c.set;
  if (c.seed) overrides.push_back("seed=" + std::to_string(*c.seed));
  if (c.threads) overrides.push_back("threads=" + std::to_string(*c.threads));
  if (c.output_dir) overrides.push_back("output_dir=" + nlohmann::json(*c.output_dir).dump());
  return load_config(c.config, overrides);
}

RunOptions run_options(const Common& c) {
  RunOptions o;
  o.force = c.force;
  o.log = c.quiet ? nullptr : &std::cerr;
  return o;
}

std::vector<std::string> read_ids(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (!t.empty() && t[0] != '#') ids.emplace_back(t);
  }
  return ids;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sciatlas: citation-network base maps of science"};
  app.require_subcommand(1);

  Common common;
  std::vector<std::pair<Stage, CLI::App*>> stage_cmds;
  for (auto s : kAllStages) {
    auto* sub = app.add_subcommand(std::string(to_string(s)), "run the " + std::string(to_string(s)) + " stage");
    add_common(sub, common);
    stage_cmds.emplace_back(s, sub);
  }
  auto* all = app.add_subcommand("all", "run every stage, then the configured overlays");
  add_common(all, common);

  auto* overlay = app.add_subcommand("overlay", "project a subset or metric onto the base map");
  add_common(overlay, common);
  OverlayRequest req;
  std::string mode = "subset_size", denom = "all_members";
  std::optional<std::string> subset, metric;
  std::vector<double> range;
  bool configured = false;
  overlay->add_option("--name", req.name, "bundle name under <output_dir>/overlays");
  overlay->add_option("--mode", mode, "subset_size | metric_color | cited_by");
  overlay->add_option("--subset", subset, "subset (or focal set for cited_by), one pub_id per line");
  overlay->add_option("--metric", metric, "pub_id<TAB>value file; default is the corpus oa_status");
  overlay->add_option("--denominator", denom, "all_members | with_value_only");
  overlay->add_option("--range", range, "metric range lo hi")->expected(2);
  overlay->add_option("--max-cited-year", req.max_cited_year, "cited_by: ignore cited publications after this year");
  overlay->add_option("--title", req.title, "bundle title");
  overlay->add_flag("--configured", configured, "run the overlays listed in the config (or the one named by --name)");

  auto* validate = app.add_subcommand("validate", "check a bundle directory; prints a JSON report");
  std::string bundle_dir;
  validate->add_option("dir", bundle_dir, "bundle directory")->required();

  auto* synth = app.add_subcommand("synth", "write a synthetic corpus with a planted hierarchy");
  SynthOptions so;
  std::string synth_out;
  synth->add_option("-o,--out", synth_out, "output directory")->required();
  synth->add_option("--publications", so.publications, "number of publications");
  synth->add_option("--citations-per-publication", so.citations_per_publication, "mean references per publication");
  synth->add_option("--seed", so.seed, "generator seed");

  auto* fetch = app.add_subcommand("fetch", "download citation links for a list of ids");
  FetchOptions fo;
  std::string ids_file, fetch_out;
  fetch->add_option("--ids", ids_file, "one pub_id per line")->required();
  fetch->add_option("--endpoint", fo.endpoint, "API URL, e.g. http://host/api/pubs")->required();
  fetch->add_option("-o,--output", fetch_out, "citations.tsv to append to")->required();
  fetch->add_option("--rate-limit", fo.rate_limit, "requests per second");
  fetch->add_option("--batch-size", fo.batch_size, "ids per request");
  fetch->add_option("--max-retries", fo.max_retries, "retries per batch on 429/5xx");
  fetch->add_option("--journal", fo.journal, "progress journal (default <output>.journal)");

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& [stage, sub] : stage_cmds) {
      if (sub->parsed()) {
        run_stage(stage, load(common), run_options(common));
        return 0;
      }
    }
    if (all->parsed()) {
      run_all(load(common), run_options(common));
      return 0;
    }
    if (overlay->parsed()) {
      const auto config = load(common);
      if (configured) {
        bool any = false;
        for (const auto& r : config.overlays) {
          if (req.name.empty() || r.name == req.name) {
            run_overlay(config, r, run_options(common));
            any = true;
          }
        }
        if (!any) throw Error("no configured overlay" + (req.name.empty() ? std::string() : " named '" + req.name + "'"));
        return 0;
      }
      req.mode = parse_overlay_mode(mode);
      if (subset) req.subset = *subset;
      if (metric) req.metric = *metric;
      if (denom == "with_value_only") {
        req.denominator = DenominatorRule::kWithValueOnly;
      } else if (denom != "all_members") {
        throw Error("--denominator must be all_members or with_value_only");
      }
      if (range.size() == 2) req.range = {range[0], range[1]};
      if (req.name.empty()) req.name = std::string(to_string(req.mode));
      if (req.mode != OverlayMode::kMetricColor && !req.subset) throw Error("--subset is required for this mode");
      run_overlay(config, req, run_options(common));
      return 0;
    }
    if (validate->parsed()) {
      const auto report = validate_bundle(bundle_dir);
      std::cout << report.dump(2) << '\n';
      return report["valid"].get<bool>() ? 0 : 1;
    }
    if (synth->parsed()) {
      const auto out = synthesize(so);
      write_synthetic(out, synth_out);
      std::cerr << "wrote " << out.records.size() << " records and " << out.raw_citations.size()
                << " citation rows to " << synth_out << '\n';
      return 0;
    }
    if (fetch->parsed()) {
      const auto r = fetch_citations_remote(read_ids(ids_file), fo, fetch_out, &std::cerr);
      std::cerr << r.edges << " edges from " << r.requests << " requests (" << r.retries << " retries, "
                << r.resumed << " batches resumed, " << r.malformed << " malformed entries)\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
