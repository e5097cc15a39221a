#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ncc/corpus.hpp"
#include "ncc/lookup_table.hpp"
#include "ncc/model.hpp"

namespace ncc {

// K x K tally, rows are true causes, columns predicted causes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(std::size_t causes = 0) : k_(causes), cells_(causes * causes, 0) {}

  std::size_t causes() const { return k_; }
  std::uint64_t at(CauseId truth, CauseId predicted) const { return cells_.at(truth * k_ + predicted); }
  void add(CauseId truth, CauseId predicted) { ++cells_.at(truth * k_ + predicted); }
  std::uint64_t total() const;

  std::uint64_t true_positives(CauseId k) const { return at(k, k); }
  std::uint64_t false_positives(CauseId k) const;  // column sum minus diagonal
  std::uint64_t false_negatives(CauseId k) const;  // row sum minus diagonal

  bool operator==(const ConfusionMatrix&) const = default;

 private:
  std::size_t k_;
  std::vector<std::uint64_t> cells_;
};

// Throws std::invalid_argument on length mismatch or out-of-range causes.
ConfusionMatrix confusion(std::span<const CauseId> truth, std::span<const CauseId> predicted, std::size_t causes);

struct ClassMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;  // true instances
};

// Zero denominators yield 0.
std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm);

struct MacroReport {
  std::vector<ClassMetrics> per_class;
  // Unweighted means over all K classes. f1 is the mean of per-class F1,
  // not the harmonic mean of the macro precision and recall.
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  ConfusionMatrix matrix;
};

// Throws std::invalid_argument for fewer than two classes.
MacroReport macro(std::span<const ClassMetrics> per_class);
MacroReport evaluate(std::span<const CauseId> truth, std::span<const CauseId> predicted, std::size_t causes);

// Predictions of a model over the failed logs of a corpus, in corpus order.
std::vector<CauseId> predict_corpus(const Model& model, const Corpus& test, std::size_t jobs = 1);

struct AblationRun {
  Variant variant = Variant::full;
  ModelBuild build;
  std::vector<CauseId> predictions;
  MacroReport report;
};

AblationRun run_ablation(const Corpus& train, const Corpus& test, Variant variant,
                         const AbstractionConfig& config = {});

struct StructuralCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Drop 1 keeps every failed-log event, so its rows are a superset of Full's,
// and the extra rows are exactly the events also seen in passed logs.
StructuralCheck check_drop1_superset(const TableBuild& full, const TableBuild& drop1);
// Drop 2 rows equal raw counts times icf.
StructuralCheck check_drop2_bypass(const TableBuild& drop2);
// Full = Drop 3 x icf per column, cell by cell.
StructuralCheck check_drop3_scaling(const ScoreTable& full, const ScoreTable& drop3, double tolerance = 1e-9);

// Aligned text table: one row per named report (macro P/R/F1).
void write_macro_table(std::ostream& out, const std::vector<std::pair<std::string, const MacroReport*>>& rows);
// Class-wise table: per cause, one row per named report.
void write_class_table(std::ostream& out, const CauseTaxonomy& taxonomy,
                       const std::vector<std::pair<std::string, const MacroReport*>>& rows);
void write_confusion(std::ostream& out, const ConfusionMatrix& cm, const CauseTaxonomy& taxonomy);

// One record per class plus a "macro" record.
nlohmann::json report_records(const std::string& approach, const MacroReport& report, const CauseTaxonomy& taxonomy);

}  // namespace ncc
