#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "sciatlas/corpus.hpp"

namespace sciatlas {

/// Planted four-level hierarchy: areas > disciplines > specialties > topics.
struct SynthOptions {
  std::size_t publications = 10000;
  double citations_per_publication = 5.0;
  std::size_t areas = 3;
  std::size_t disciplines_per_area = 2;
  std::size_t specialties_per_discipline = 4;
  std::size_t topics_per_specialty = 5;
  /// Probability that a reference lands in the same topic, the same
  /// specialty, the same discipline, the same area; the rest go anywhere.
  double p_topic = 0.70;
  double p_specialty = 0.15;
  double p_discipline = 0.08;
  double p_area = 0.04;
  std::uint64_t seed = 7;
};

struct PlantedLabels {
  std::vector<std::uint32_t> topic, specialty, discipline, area;  // per publication
};

/// Records are deterministic in the seed. A small share of the output is
/// noise the loader must reject: editorials, pre-1995 records,
/// self-citations and citations to unknown ids (raw_citations only).
struct SynthOutput {
  std::vector<PublicationRecord> records;
  std::vector<std::string> editorial_lines;  // JSONL records of an excluded type
  std::vector<std::pair<std::string, std::string>> raw_citations;
  PlantedLabels truth;  // for records[i], valid for i < publications
};

SynthOutput synthesize(const SynthOptions& options);

/// Writes publications.jsonl, citations.tsv, truth.tsv, subset.txt
/// (publications of the first discipline from 2015 on) and focal.txt (the
/// 2020+ publications of the first discipline).
void write_synthetic(const SynthOutput& out, const std::filesystem::path& dir);

}  // namespace sciatlas
