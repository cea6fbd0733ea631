// Python bindings for the core library. Graphs cross the boundary as
// (node_count, [(u, v, weight)], node_weights or None); JSON documents as
// strings, decoded on the Python side.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sciatlas/export.hpp"
#include "sciatlas/labeler.hpp"
#include "sciatlas/layout.hpp"
#include "sciatlas/leiden.hpp"
#include "sciatlas/mapbuild.hpp"
#include "sciatlas/pipeline.hpp"
#include "sciatlas/synth.hpp"
#include "sciatlas/util.hpp"

namespace py = pybind11;
using namespace sciatlas;

namespace {

using EdgeList = std::vector<std::tuple<std::uint32_t, std::uint32_t, double>>;

WeightedGraph make_graph(std::size_t n, const EdgeList& edges, const std::optional<std::vector<double>>& nw) {
  std::vector<Edge> es;
  es.reserve(edges.size());
  for (const auto& [u, v, w] : edges) {
    if (u >= n || v >= n) throw Error("edge endpoint out of range");
    es.push_back(Edge{std::min(u, v), std::max(u, v), w});
  }
  if (nw && nw->size() != n) throw Error("node_weights must have one entry per node");
  return WeightedGraph(nw ? *nw : std::vector<double>(n, 1.0), std::move(es));
}

Stage parse_stage(const std::string& name) {
  for (auto s : kAllStages) {
    if (to_string(s) == name) return s;
  }
  throw Error("unknown stage '" + name + "'");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "sciatlas core: CPM/Leiden clustering, map construction and export";

  // Translators run newest first, so the subclass is registered last.
  auto error = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", error.ptr());

  m.def(
      "cpm_quality",
      [](std::size_t n, const EdgeList& edges, const std::vector<std::uint32_t>& labels, double resolution,
         const std::optional<std::vector<double>>& node_weights) {
        const auto g = make_graph(n, edges, node_weights);
        Partition p{labels};
        if (p.assignment.size() != n) throw Error("labels must have one entry per node");
        return cpm_quality(g, canonical_order(g, p), resolution);
      },
      py::arg("n"), py::arg("edges"), py::arg("labels"), py::arg("resolution"), py::arg("node_weights") = py::none());

  m.def(
      "leiden",
      [](std::size_t n, const EdgeList& edges, double resolution, std::uint64_t seed, int max_iterations,
         const std::optional<std::vector<double>>& node_weights) {
        const auto g = make_graph(n, edges, node_weights);
        py::gil_scoped_release release;
        return leiden(g, LeidenOptions{resolution, seed, max_iterations}).assignment;
      },
      py::arg("n"), py::arg("edges"), py::arg("resolution"), py::arg("seed") = 0, py::arg("max_iterations") = 100,
      py::arg("node_weights") = py::none());

  m.def(
      "node_size", [](double count, const std::string& level) { return node_size(count, parse_map_level(level)); },
      py::arg("count"), py::arg("level") = "Discipline");

  m.def(
      "hyperlinks",
      [](std::vector<std::string> ids) {
        const auto h = make_hyperlinks(std::move(ids));
        py::dict d;
        py::list links;
        for (const auto& l : h.links) links.append(py::make_tuple(l.label, l.url));
        d["links"] = links;
        d["sentinel"] = h.sentinel ? py::object(py::str(*h.sentinel)) : py::object(py::none());
        return d;
      },
      py::arg("ids"));

  m.def("tfs_score", &tfs_score, py::arg("tf_cluster"), py::arg("tf_total"), py::arg("alpha"));

  m.def(
      "place_children",
      [](const std::vector<std::pair<double, double>>& raw, std::pair<double, double> parent, double m) {
        std::vector<NodePosition> in;
        for (const auto& [x, y] : raw) in.push_back({x, y});
        std::vector<std::pair<double, double>> out;
        for (const auto& p : place_children(in, {parent.first, parent.second}, m)) out.emplace_back(p.x, p.y);
        return out;
      },
      py::arg("raw"), py::arg("parent"), py::arg("m"));

  m.def(
      "synthesize",
      [](const std::filesystem::path& out, std::size_t publications, double citations_per_publication,
         std::uint64_t seed) {
        SynthOptions o;
        o.publications = publications;
        o.citations_per_publication = citations_per_publication;
        o.seed = seed;
        py::gil_scoped_release release;
        write_synthetic(synthesize(o), out);
      },
      py::arg("out"), py::arg("publications") = 10000, py::arg("citations_per_publication") = 5.0,
      py::arg("seed") = 7);

  m.def(
      "output_dir",
      [](const std::filesystem::path& config, const std::vector<std::string>& overrides) {
        return load_config(config, overrides).output_dir;
      },
      py::arg("config"), py::arg("overrides") = std::vector<std::string>{});

  m.def(
      "run_stage",
      [](const std::string& stage, const std::filesystem::path& config, const std::vector<std::string>& overrides,
         bool force) {
        const auto c = load_config(config, overrides);
        py::gil_scoped_release release;
        run_stage(parse_stage(stage), c, RunOptions{.force = force});
      },
      py::arg("stage"), py::arg("config"), py::arg("overrides") = std::vector<std::string>{},
      py::arg("force") = false);

  m.def(
      "run_all",
      [](const std::filesystem::path& config, const std::vector<std::string>& overrides, bool force) {
        const auto c = load_config(config, overrides);
        py::gil_scoped_release release;
        run_all(c, RunOptions{.force = force});
      },
      py::arg("config"), py::arg("overrides") = std::vector<std::string>{}, py::arg("force") = false);

  m.def(
      "validate_bundle_json", [](const std::filesystem::path& dir) { return validate_bundle(dir).dump(); },
      py::arg("dir"));

  m.def("map_data_schema_json", [] { return std::string(map_data_schema()); });
}
