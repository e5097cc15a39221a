#pragma once

// Seeded synthetic corpora with planted ground truth.
//
// Templates are plain text with typed slots that are re-randomized on every
// emitted line: {num}, {ip}, {hex}, {path}. Passed logs contain only benign
// templates (and noise). A failed log of cause j always contains the first
// marker of j, each further marker of j with probability extra_marker_rate,
// each failure-common template with probability common_rate, and with
// probability marker_leak_rate one marker of another cause.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ncc/corpus.hpp"

namespace ncc {

struct SyntheticSpec {
  std::uint64_t seed = 0;
  CauseTaxonomy taxonomy = CauseTaxonomy::standard();
  std::vector<std::size_t> failed_counts;
  std::size_t passed_count = 0;
  // Per cause; sets must be pairwise disjoint and disjoint from the others.
  std::vector<std::vector<std::string>> markers;
  // Appear in passed and failed logs.
  std::vector<std::string> benign;
  // Appear in failed logs of every cause, never in passed logs.
  std::vector<std::string> failure_common;
  double noise_rate = 0.0;
  std::size_t min_lines = 20;
  std::size_t max_lines = 60;
  double extra_marker_rate = 0.5;
  double common_rate = 0.7;
  double marker_leak_rate = 0.0;

  // Throws ValidationError.
  void validate() const;
};

// Auto-generates distinct templates. Every template starts with a unique
// digit-free tag token, so the miner keeps them in separate leaves.
SyntheticSpec default_synthetic_spec(std::vector<std::size_t> failed_counts, std::size_t passed_count,
                                     std::uint64_t seed, std::size_t markers_per_cause = 3,
                                     std::size_t benign_count = 24, std::size_t common_count = 3);

// JSON spec file. Explicit template lists ("markers", "benign",
// "failure_common") take precedence over the generated ones
// ("markers_per_cause", "benign_count", "failure_common_count").
SyntheticSpec spec_from_json(const nlohmann::json& doc);
nlohmann::json spec_to_json(const SyntheticSpec& spec);
SyntheticSpec read_synthetic_spec(const std::filesystem::path& path);

struct Manifest {
  SyntheticSpec spec;

  // (marker template, cause) in cause order.
  std::vector<std::pair<std::string, CauseId>> marker_causes() const;

  // "ncc-manifest v1" key=value text.
  void write(std::ostream& out) const;
  static Manifest read(std::istream& in);
};

struct SyntheticCorpus {
  Corpus corpus;
  Manifest manifest;
};

// Fills every {slot} with a fresh random value.
std::string render_template(const std::string& tmpl, std::mt19937_64& rng);

SyntheticCorpus synthesize(const SyntheticSpec& spec);

// Writes the corpus layout (passed/, failed/, labels.csv) plus
// manifest.txt under `out_dir` and returns the manifest.
Manifest generate_synthetic(const SyntheticSpec& spec, const std::filesystem::path& out_dir);

}  // namespace ncc
