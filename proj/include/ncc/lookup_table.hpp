#pragma once

// Event x cause lookup table.
//
// Construction runs in four steps over parsed training logs:
//   1. diff with pass: drop every event seen in a passed log;
//   2. count: c[e][j] = number of failed logs of cause j containing e;
//   3. reweight: multi-problem rows are normalized to sum 1, single-problem
//      cells become 1 (c = 1) or log2(1 + c) (c > 1);
//   4. scale every column j by icf_j = N / N_j.
// The ablation variants skip step 1, 3 or 4 respectively.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ncc/corpus.hpp"
#include "ncc/log_abstraction.hpp"

namespace ncc {

enum class PoolOrigin { passed, failed };

struct EventPool {
  std::set<EventId> events;
  PoolOrigin origin = PoolOrigin::failed;

  bool contains(EventId id) const { return events.count(id) > 0; }
  std::size_t size() const { return events.size(); }
};

// Unions of the events seen in passed and failed logs. kUnknownEvent is
// never pooled.
std::pair<EventPool, EventPool> collect_pools(std::span<const EventSequence> passed,
                                              std::span<const EventSequence> failed);

// failed \ passed. Throws ValidationError when nothing is left.
EventPool diff_with_pass(const EventPool& failed, const EventPool& passed);

struct CountTable {
  std::map<EventId, std::vector<std::uint64_t>> rows;
  std::uint64_t total = 0;                  // N
  std::vector<std::uint64_t> per_cause;     // N_j

  std::size_t causes() const { return per_cause.size(); }
};

// Presence counting: a log adds at most 1 to each of its events' cells.
// `labels[i]` is the cause of `failed[i]`.
CountTable init_counts(const EventPool& keep, std::span<const EventSequence> failed,
                       std::span<const CauseId> labels, std::size_t cause_count);

// Number of nonzero cells; 1 means single-problem.
std::size_t nonzero_cells(std::span<const std::uint64_t> row);

// Throws std::invalid_argument for an all-zero row.
std::vector<double> reweight(std::span<const std::uint64_t> row);

// icf_j = N / N_j, or 0 for causes without training logs.
std::vector<double> compute_icf(std::uint64_t total, std::span<const std::uint64_t> per_cause);

enum class TableStage { counted, reweighted, final_ };
enum class RowKind { single, multi };

enum class Variant { full, drop1, drop2, drop3 };

std::string_view to_string(Variant v);
std::string_view display_name(Variant v);  // "NCChecker", "Drop 1", ...
Variant parse_variant(std::string_view text);  // throws ValidationError

struct ScoreRow {
  std::vector<double> scores;
  RowKind kind = RowKind::single;

  bool operator==(const ScoreRow&) const = default;
};

class ScoreTable {
 public:
  ScoreTable() = default;

  // Counted-stage table; icf is computed from the counts' N and N_j.
  static ScoreTable from_counts(const CountTable& counts, CauseTaxonomy taxonomy);

  TableStage stage() const { return stage_; }
  Variant variant() const { return variant_; }
  const CauseTaxonomy& taxonomy() const { return taxonomy_; }
  std::size_t causes() const { return taxonomy_.size(); }
  std::uint64_t total() const { return total_; }
  const std::vector<std::uint64_t>& per_cause() const { return per_cause_; }
  const std::vector<double>& icf() const { return icf_; }
  const std::map<EventId, ScoreRow>& rows() const { return rows_; }
  const ScoreRow* find(EventId id) const;
  std::size_t size() const { return rows_.size(); }

  // Largest N_j, lowest cause id on ties.
  CauseId majority_cause() const;

  // Stage transitions. Each throws std::logic_error when called on the
  // wrong stage.
  ScoreTable reweighted() const;          // counted -> reweighted
  ScoreTable without_reweighting() const;  // counted -> reweighted, values unchanged
  ScoreTable with_icf() const;            // reweighted -> final, columns x icf
  ScoreTable without_icf() const;         // reweighted -> final, values unchanged

  ScoreTable& set_variant(Variant v) {
    variant_ = v;
    return *this;
  }

  // Direct construction, used by tests and the loader.
  ScoreTable(CauseTaxonomy taxonomy, std::uint64_t total, std::vector<std::uint64_t> per_cause,
             std::vector<double> icf, std::map<EventId, ScoreRow> rows, TableStage stage,
             Variant variant = Variant::full);

  std::uint64_t fingerprint() const;

  // "ncc-table v1" text; requires the final stage. Numbers are written in
  // shortest round-trip form, so reading back is exact.
  void write(std::ostream& out) const;
  static ScoreTable read(std::istream& in);

  bool operator==(const ScoreTable&) const = default;

 private:
  CauseTaxonomy taxonomy_;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> per_cause_;
  std::vector<double> icf_;
  std::map<EventId, ScoreRow> rows_;
  TableStage stage_ = TableStage::counted;
  Variant variant_ = Variant::full;
};

// Free-function spellings of the stage transitions.
inline ScoreTable apply_icf(const ScoreTable& reweighted) { return reweighted.with_icf(); }

void save_table(const ScoreTable& table, const std::filesystem::path& path);
ScoreTable load_table(const std::filesystem::path& path);

// Everything a build produces, kept for inspection and ablation checks.
struct TableBuild {
  EventPool passed_pool;
  EventPool failed_pool;
  EventPool kept;  // failed \ passed, or all failed events for drop1
  CountTable counts;
  ScoreTable table;
};

// Steps 1-4 over already parsed logs.
TableBuild build_table(std::span<const EventSequence> passed, std::span<const EventSequence> failed,
                       std::span<const CauseId> labels, const CauseTaxonomy& taxonomy,
                       Variant variant = Variant::full);

}  // namespace ncc
