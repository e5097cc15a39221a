#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace ncc {

// Index into a CauseTaxonomy, 0..K-1.
using CauseId = std::size_t;

struct CauseTaxonomy {
  std::vector<std::string> names;

  std::size_t size() const { return names.size(); }
  // Short display code: "C1" for cause 0.
  static std::string code(CauseId cause) { return "C" + std::to_string(cause + 1); }
  std::string label(CauseId cause) const { return code(cause) + " " + names.at(cause); }

  // At least two causes, names non-empty and free of tabs, commas, newlines.
  void validate() const;

  // bug-related, environmental, test-script, third-party-library.
  static CauseTaxonomy standard();
  // Parses a comma-separated list of names.
  static CauseTaxonomy from_list(const std::string& comma_separated);

  bool operator==(const CauseTaxonomy&) const = default;
};

struct RawLog {
  std::string id;
  std::vector<std::string> lines;
};

struct LabeledFailedLog {
  std::string id;
  std::vector<std::string> lines;
  CauseId cause = 0;
};

struct Corpus {
  std::vector<RawLog> passed;
  std::vector<LabeledFailedLog> failed;
  CauseTaxonomy taxonomy;

  // N_j: number of failed logs per cause.
  std::vector<std::uint64_t> cause_counts() const;
  std::vector<CauseId> labels() const;

  // Unique ids across passed and failed logs, causes within the taxonomy.
  void validate() const;
};

// Reads a "log_id,cause_id" CSV with header. Throws ValidationError for
// malformed rows, duplicate ids, and causes outside the taxonomy.
std::map<std::string, CauseId> read_labels(const std::filesystem::path& path, const CauseTaxonomy& taxonomy);
void write_labels(const std::filesystem::path& path, const std::vector<LabeledFailedLog>& failed);

// Loads `root/passed/*.log` and `root/failed/*.log`; the log id is the file
// stem. Either directory may be absent. Logs are sorted by id. Every failed
// log needs a label row and every label row a failed log; all problems are
// reported together in one ValidationError.
Corpus load_corpus(const std::filesystem::path& root, const std::filesystem::path& labels,
                   const CauseTaxonomy& taxonomy);

// Writes the layout read by load_corpus, labels in `root/labels.csv`.
void write_corpus(const Corpus& corpus, const std::filesystem::path& root);

// Number of logs of a cause with `count` failed logs that go to the test
// side: ceil(count * fraction), at least 1 and at most count - 1. Causes with
// a single log stay in train.
std::size_t stratified_test_count(std::size_t count, double test_fraction);

// Stratified train/test split of the failed logs; passed logs stay in train.
// Deterministic for a fixed seed, independent of input order.
std::pair<Corpus, Corpus> split(const Corpus& corpus, double test_fraction, std::uint64_t seed);

}  // namespace ncc
