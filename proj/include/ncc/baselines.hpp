#pragma once

// Reference classifiers: Random Guess, Majority Class, and simplified
// retrieval models in the style of CAM (TF-IDF over raw log terms) and
// LogFaultFlagger (IDF-weighted mined events), both voting over the K
// nearest training logs by cosine similarity.

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ncc/corpus.hpp"
#include "ncc/evaluation.hpp"
#include "ncc/log_abstraction.hpp"

namespace ncc {

// --- Random Guess / Majority Class -------------------------------------------

// Each trial draws `test_size` causes with probability N_j / N.
std::vector<std::vector<CauseId>> rg_trials(std::span<const std::uint64_t> train_counts, std::size_t test_size,
                                            std::size_t trials, std::uint64_t seed);

struct RgResult {
  std::vector<std::vector<CauseId>> trials;
  std::size_t median_trial = 0;  // lower median by macro F1, ties by trial index
  MacroReport report;            // report of the median trial
};

RgResult rg_predict(std::span<const std::uint64_t> train_counts, std::span<const CauseId> truth,
                    std::size_t trials, std::uint64_t seed);

// Largest count, lowest id on ties. Throws std::invalid_argument when every
// count is zero.
CauseId majority_class(std::span<const std::uint64_t> train_counts);
std::vector<CauseId> mcc_predict(std::span<const std::uint64_t> train_counts, std::size_t test_size);

// --- Retrieval ---------------------------------------------------------------

struct KnnConfig {
  std::size_t k_neighbors = 5;
};

using TermCounts = std::map<std::uint32_t, std::uint64_t>;

// TF-IDF vectors (tf = raw count, idf = ln(N / df)), L2-normalized, with
// cosine k-nearest-neighbor voting. Vote ties go to the label whose best
// neighbor ranks highest; similarity ties rank by document id.
class KnnIndex {
 public:
  struct Document {
    std::string id;
    TermCounts terms;
    CauseId label = 0;
  };
  struct Neighbor {
    std::size_t doc = 0;
    double similarity = 0.0;
  };

  KnnIndex() = default;
  KnnIndex(std::vector<Document> docs, std::size_t causes, KnnConfig config);

  // Every training document, best first.
  std::vector<Neighbor> rank(const TermCounts& query) const;
  // Falls back to the majority training label when the query vector is zero
  // or shares no weighted term with any training document.
  CauseId predict(const TermCounts& query) const;

  double idf(std::uint32_t term) const;
  const std::string& doc_id(std::size_t doc) const { return ids_.at(doc); }
  CauseId doc_label(std::size_t doc) const { return labels_.at(doc); }
  std::size_t size() const { return ids_.size(); }
  CauseId majority() const { return majority_; }

 private:
  std::vector<std::pair<std::uint32_t, double>> weigh(const TermCounts& tf) const;

  KnnConfig config_;
  std::map<std::uint32_t, double> idf_;
  std::vector<std::string> ids_;
  std::vector<CauseId> labels_;
  std::map<std::uint32_t, std::vector<std::pair<std::size_t, double>>> postings_;
  CauseId majority_ = 0;
};

class CamIndex {
 public:
  static CamIndex train(const Corpus& train, KnnConfig config = {});
  CauseId predict(const std::vector<std::string>& lines) const;

  TermCounts vectorize(const std::vector<std::string>& lines) const;
  const KnnIndex& index() const { return index_; }

 private:
  std::map<std::string, std::uint32_t, std::less<>> vocabulary_;
  KnnIndex index_;
};

class LffIndex {
 public:
  // Sequences come from the shared miner; the vocabulary is the failed-log
  // events that never occur in a passed log.
  static LffIndex train(std::span<const EventSequence> passed, std::span<const EventSequence> failed,
                        std::span<const CauseId> labels, std::size_t causes, KnnConfig config = {});
  CauseId predict(const EventSequence& events) const;

  TermCounts vectorize(const EventSequence& events) const;
  const KnnIndex& index() const { return index_; }

 private:
  std::set<EventId> vocabulary_;
  KnnIndex index_;
};

}  // namespace ncc
