#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ncc/corpus.hpp"
#include "ncc/log_abstraction.hpp"
#include "ncc/lookup_table.hpp"

namespace ncc {

// A trained model: the frozen template miner plus the final lookup table.
// Self-contained; prediction needs nothing else.
struct Model {
  TemplateMiner miner;
  ScoreTable table;

  // "ncc-model v1" artifact bundling the miner state and the table.
  void write(std::ostream& out) const;
  static Model read(std::istream& in);

  std::uint64_t fingerprint() const;
};

struct ModelBuild {
  Model model;
  std::vector<EventSequence> passed;
  std::vector<EventSequence> failed;
  TableBuild details;
};

// Parses every training log (passed first, then failed, each in corpus
// order) with a fresh miner, freezes it, and builds the table.
ModelBuild build_model(const Corpus& train, const AbstractionConfig& config = {},
                       Variant variant = Variant::full);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

}  // namespace ncc
