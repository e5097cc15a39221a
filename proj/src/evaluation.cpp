#include "ncc/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "ncc/predictor.hpp"

namespace ncc {

std::uint64_t ConfusionMatrix::total() const { return std::accumulate(cells_.begin(), cells_.end(), std::uint64_t{0}); }

std::uint64_t ConfusionMatrix::false_positives(CauseId k) const {
  std::uint64_t sum = 0;
  for (CauseId t = 0; t < k_; ++t) {
    if (t != k) sum += at(t, k);
  }
  return sum;
}

std::uint64_t ConfusionMatrix::false_negatives(CauseId k) const {
  std::uint64_t sum = 0;
  for (CauseId p = 0; p < k_; ++p) {
    if (p != k) sum += at(k, p);
  }
  return sum;
}

ConfusionMatrix confusion(std::span<const CauseId> truth, std::span<const CauseId> predicted, std::size_t causes) {
  if (truth.size() != predicted.size()) throw std::invalid_argument("confusion: truth and predictions differ in length");
  ConfusionMatrix cm(causes);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] >= causes || predicted[i] >= causes) throw std::invalid_argument("confusion: cause out of range");
    cm.add(truth[i], predicted[i]);
  }
  return cm;
}

namespace {

double ratio(std::uint64_t num, std::uint64_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::vector<ClassMetrics> per_class_metrics(const ConfusionMatrix& cm) {
  std::vector<ClassMetrics> out(cm.causes());
  for (CauseId k = 0; k < cm.causes(); ++k) {
    const auto tp = cm.true_positives(k);
    const auto fp = cm.false_positives(k);
    const auto fn = cm.false_negatives(k);
    auto& m = out[k];
    m.precision = ratio(tp, tp + fp);
    m.recall = ratio(tp, tp + fn);
    m.f1 = m.precision + m.recall == 0.0 ? 0.0 : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    m.support = tp + fn;
  }
  return out;
}

MacroReport macro(std::span<const ClassMetrics> per_class) {
  if (per_class.size() < 2) throw std::invalid_argument("macro: need at least two classes");
  MacroReport r;
  r.per_class.assign(per_class.begin(), per_class.end());
  for (const auto& m : per_class) {
    r.precision += m.precision;
    r.recall += m.recall;
    r.f1 += m.f1;
  }
  const auto k = static_cast<double>(per_class.size());
  r.precision /= k;
  r.recall /= k;
  r.f1 /= k;
  r.matrix = ConfusionMatrix(per_class.size());
  return r;
}

MacroReport evaluate(std::span<const CauseId> truth, std::span<const CauseId> predicted, std::size_t causes) {
  const ConfusionMatrix cm = confusion(truth, predicted, causes);
  MacroReport r = macro(per_class_metrics(cm));
  r.matrix = cm;
  return r;
}

std::vector<CauseId> predict_corpus(const Model& model, const Corpus& test, std::size_t jobs) {
  std::vector<CauseId> out(test.failed.size(), 0);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const auto& log = test.failed[i];
      out[i] = predict(model.table, model.miner.match_log(log.id, log.lines)).cause;
    }
  };
  jobs = std::max<std::size_t>(1, std::min(jobs, out.size()));
  if (jobs == 1) {
    work(0, out.size());
    return out;
  }
  std::vector<std::thread> threads;
  const std::size_t chunk = (out.size() + jobs - 1) / jobs;
  for (std::size_t t = 0; t < jobs; ++t) {
    const std::size_t begin = t * chunk;
    const std::size_t end = std::min(out.size(), begin + chunk);
    if (begin < end) threads.emplace_back(work, begin, end);
  }
  for (auto& th : threads) th.join();
  return out;
}

AblationRun run_ablation(const Corpus& train, const Corpus& test, Variant variant, const AbstractionConfig& config) {
  AblationRun run;
  run.variant = variant;
  run.build = build_model(train, config, variant);
  run.predictions = predict_corpus(run.build.model, test);
  run.report = evaluate(test.labels(), run.predictions, train.taxonomy.size());
  return run;
}

// ---------------------------------------------------------------------------

StructuralCheck check_drop1_superset(const TableBuild& full, const TableBuild& drop1) {
  StructuralCheck c{"drop1 rows are a superset of full rows", true, {}};
  std::size_t extra = 0;
  for (const auto& [id, row] : full.table.rows()) {
    if (!drop1.table.find(id)) {
      c.passed = false;
      c.detail = to_string(id) + " is in the full table but not in drop1";
      return c;
    }
  }
  for (const auto& [id, row] : drop1.table.rows()) {
    const bool in_full = full.table.find(id) != nullptr;
    const bool in_passed = drop1.passed_pool.contains(id);
    if (in_full == in_passed) {
      c.passed = false;
      c.detail = to_string(id) + (in_passed ? " occurs in a passed log but is in the full table"
                                            : " is missing from the full table without occurring in a passed log");
      return c;
    }
    if (!in_full) ++extra;
  }
  c.detail = std::to_string(full.table.size()) + " full rows, " + std::to_string(extra) + " extra passed-log rows";
  return c;
}

StructuralCheck check_drop2_bypass(const TableBuild& drop2) {
  StructuralCheck c{"drop2 rows are raw counts times icf", true, {}};
  const auto& icf = drop2.table.icf();
  for (const auto& [id, counts] : drop2.counts.rows) {
    const ScoreRow* row = drop2.table.find(id);
    if (!row) {
      c.passed = false;
      c.detail = to_string(id) + " is counted but has no row";
      return c;
    }
    for (std::size_t j = 0; j < counts.size(); ++j) {
      const double expected = static_cast<double>(counts[j]) * icf[j];
      if (std::abs(row->scores[j] - expected) > 1e-9 * std::max(1.0, expected)) {
        c.passed = false;
        c.detail = to_string(id) + " column " + CauseTaxonomy::code(j) + " differs from count x icf";
        return c;
      }
    }
  }
  c.detail = std::to_string(drop2.counts.rows.size()) + " rows checked";
  return c;
}

StructuralCheck check_drop3_scaling(const ScoreTable& full, const ScoreTable& drop3, double tolerance) {
  StructuralCheck c{"full = drop3 x icf per column", true, {}};
  if (full.size() != drop3.size()) {
    c.passed = false;
    c.detail = "row sets differ";
    return c;
  }
  const auto& icf = full.icf();
  double worst = 0.0;
  for (const auto& [id, row] : full.rows()) {
    const ScoreRow* other = drop3.find(id);
    if (!other) {
      c.passed = false;
      c.detail = to_string(id) + " missing from drop3";
      return c;
    }
    for (std::size_t j = 0; j < row.scores.size(); ++j) {
      worst = std::max(worst, std::abs(row.scores[j] - other->scores[j] * icf[j]));
    }
  }
  c.passed = worst <= tolerance;
  std::ostringstream detail;
  detail << full.size() << " rows, max deviation " << worst;
  c.detail = detail.str();
  return c;
}

// ---------------------------------------------------------------------------

namespace {

std::string pct(double v) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << v * 100.0 << '%';
  return s.str();
}

std::size_t name_width(const std::vector<std::pair<std::string, const MacroReport*>>& rows, std::size_t min) {
  std::size_t w = min;
  for (const auto& [name, r] : rows) w = std::max(w, name.size());
  return w + 2;
}

}  // namespace

void write_macro_table(std::ostream& out, const std::vector<std::pair<std::string, const MacroReport*>>& rows) {
  const std::size_t w = name_width(rows, 7);
  out << std::left << std::setw(static_cast<int>(w)) << "Measure" << std::right << std::setw(11) << "Precision"
      << std::setw(10) << "Recall" << std::setw(10) << "F1" << '\n';
  for (const auto& [name, r] : rows) {
    out << std::left << std::setw(static_cast<int>(w)) << name << std::right << std::setw(11) << pct(r->precision)
        << std::setw(10) << pct(r->recall) << std::setw(10) << pct(r->f1) << '\n';
  }
}

void write_class_table(std::ostream& out, const CauseTaxonomy& taxonomy,
                       const std::vector<std::pair<std::string, const MacroReport*>>& rows) {
  const std::size_t w = name_width(rows, 8);
  std::size_t tw = 4;
  for (CauseId k = 0; k < taxonomy.size(); ++k) tw = std::max(tw, taxonomy.label(k).size());
  tw += 2;
  out << std::left << std::setw(static_cast<int>(tw)) << "Type" << std::setw(static_cast<int>(w)) << "Approach"
      << std::right << std::setw(11) << "Precision" << std::setw(10) << "Recall" << std::setw(10) << "F1" << '\n';
  for (CauseId k = 0; k < taxonomy.size(); ++k) {
    bool first = true;
    for (const auto& [name, r] : rows) {
      const auto& m = r->per_class.at(k);
      out << std::left << std::setw(static_cast<int>(tw)) << (first ? taxonomy.label(k) : "")
          << std::setw(static_cast<int>(w)) << name << std::right << std::setw(11) << pct(m.precision)
          << std::setw(10) << pct(m.recall) << std::setw(10) << pct(m.f1) << '\n';
      first = false;
    }
  }
}

void write_confusion(std::ostream& out, const ConfusionMatrix& cm, const CauseTaxonomy& taxonomy) {
  out << std::left << std::setw(12) << "true\\pred" << std::right;
  for (CauseId p = 0; p < cm.causes(); ++p) out << std::setw(8) << CauseTaxonomy::code(p);
  out << '\n';
  for (CauseId t = 0; t < cm.causes(); ++t) {
    out << std::left << std::setw(12) << taxonomy.code(t) << std::right;
    for (CauseId p = 0; p < cm.causes(); ++p) out << std::setw(8) << cm.at(t, p);
    out << '\n';
  }
}

nlohmann::json report_records(const std::string& approach, const MacroReport& report, const CauseTaxonomy& taxonomy) {
  nlohmann::json records = nlohmann::json::array();
  for (CauseId k = 0; k < report.per_class.size(); ++k) {
    const auto& m = report.per_class[k];
    records.push_back({{"approach", approach},
                       {"class", CauseTaxonomy::code(k)},
                       {"name", taxonomy.names.at(k)},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support}});
  }
  records.push_back({{"approach", approach},
                     {"class", "macro"},
                     {"precision", report.precision},
                     {"recall", report.recall},
                     {"f1", report.f1},
                     {"support", report.matrix.total()}});
  return records;
}

}  // namespace ncc
