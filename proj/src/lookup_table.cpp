#include "ncc/lookup_table.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "ncc/errors.hpp"
#include "ncc/text_io.hpp"

namespace ncc {

std::pair<EventPool, EventPool> collect_pools(std::span<const EventSequence> passed,
                                              std::span<const EventSequence> failed) {
  EventPool p{{}, PoolOrigin::passed};
  EventPool f{{}, PoolOrigin::failed};
  for (const auto& seq : passed) p.events.insert(seq.events.begin(), seq.events.end());
  for (const auto& seq : failed) f.events.insert(seq.events.begin(), seq.events.end());
  p.events.erase(kUnknownEvent);
  f.events.erase(kUnknownEvent);
  return {std::move(p), std::move(f)};
}

EventPool diff_with_pass(const EventPool& failed, const EventPool& passed) {
  EventPool kept{{}, PoolOrigin::failed};
  std::set_difference(failed.events.begin(), failed.events.end(), passed.events.begin(), passed.events.end(),
                      std::inserter(kept.events, kept.events.end()));
  if (kept.events.empty()) {
    throw ValidationError("no discriminative events: every failed-log event also occurs in a passed log");
  }
  return kept;
}

CountTable init_counts(const EventPool& keep, std::span<const EventSequence> failed,
                       std::span<const CauseId> labels, std::size_t cause_count) {
  if (failed.size() != labels.size()) throw std::invalid_argument("init_counts: one label per failed log");
  CountTable counts;
  counts.per_cause.assign(cause_count, 0);
  counts.total = failed.size();
  for (std::size_t i = 0; i < failed.size(); ++i) {
    const CauseId cause = labels[i];
    if (cause >= cause_count) throw std::invalid_argument("init_counts: label outside taxonomy");
    ++counts.per_cause[cause];
    std::set<EventId> present(failed[i].events.begin(), failed[i].events.end());
    for (const EventId e : present) {
      if (!keep.contains(e)) continue;
      auto& row = counts.rows[e];
      if (row.empty()) row.assign(cause_count, 0);
      ++row[cause];
    }
  }
  return counts;
}

std::size_t nonzero_cells(std::span<const std::uint64_t> row) {
  return static_cast<std::size_t>(std::count_if(row.begin(), row.end(), [](auto c) { return c != 0; }));
}

std::vector<double> reweight(std::span<const std::uint64_t> row) {
  const std::size_t nonzero = nonzero_cells(row);
  if (nonzero == 0) throw std::invalid_argument("reweight: all-zero row");
  std::vector<double> out(row.size(), 0.0);
  if (nonzero >= 2) {
    std::uint64_t sum = 0;
    for (const auto c : row) sum += c;
    for (std::size_t j = 0; j < row.size(); ++j) {
      out[j] = static_cast<double>(row[j]) / static_cast<double>(sum);
    }
    return out;
  }
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (row[j] == 1) {
      out[j] = 1.0;
    } else if (row[j] > 1) {
      out[j] = std::log2(1.0 + static_cast<double>(row[j]));
    }
  }
  return out;
}

std::vector<double> compute_icf(std::uint64_t total, std::span<const std::uint64_t> per_cause) {
  std::vector<double> icf(per_cause.size(), 0.0);
  for (std::size_t j = 0; j < per_cause.size(); ++j) {
    if (per_cause[j] > 0) icf[j] = static_cast<double>(total) / static_cast<double>(per_cause[j]);
  }
  return icf;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Variant v) {
  switch (v) {
    case Variant::full: return "full";
    case Variant::drop1: return "drop1";
    case Variant::drop2: return "drop2";
    case Variant::drop3: return "drop3";
  }
  return "full";
}

std::string_view display_name(Variant v) {
  switch (v) {
    case Variant::full: return "NCChecker";
    case Variant::drop1: return "Drop 1";
    case Variant::drop2: return "Drop 2";
    case Variant::drop3: return "Drop 3";
  }
  return "NCChecker";
}

Variant parse_variant(std::string_view text) {
  for (const auto v : {Variant::full, Variant::drop1, Variant::drop2, Variant::drop3}) {
    if (text == to_string(v)) return v;
  }
  throw ValidationError("unknown variant '" + std::string(text) + "'");
}

namespace {

std::string_view stage_name(TableStage s) {
  switch (s) {
    case TableStage::counted: return "counted";
    case TableStage::reweighted: return "reweighted";
    case TableStage::final_: return "final";
  }
  return "counted";
}

void require_stage(const ScoreTable& t, TableStage expected, std::string_view op) {
  if (t.stage() != expected) {
    throw std::logic_error(std::string(op) + ": table is at stage '" + std::string(stage_name(t.stage())) +
                           "', expected '" + std::string(stage_name(expected)) + "'");
  }
}

}  // namespace

ScoreTable::ScoreTable(CauseTaxonomy taxonomy, std::uint64_t total, std::vector<std::uint64_t> per_cause,
                       std::vector<double> icf, std::map<EventId, ScoreRow> rows, TableStage stage,
                       Variant variant)
    : taxonomy_(std::move(taxonomy)),
      total_(total),
      per_cause_(std::move(per_cause)),
      icf_(std::move(icf)),
      rows_(std::move(rows)),
      stage_(stage),
      variant_(variant) {
  const std::size_t k = taxonomy_.size();
  if (per_cause_.size() != k || icf_.size() != k) {
    throw std::invalid_argument("ScoreTable: per-cause vectors must have one entry per cause");
  }
  for (const auto& [id, row] : rows_) {
    if (row.scores.size() != k) throw std::invalid_argument("ScoreTable: row width differs from cause count");
  }
}

ScoreTable ScoreTable::from_counts(const CountTable& counts, CauseTaxonomy taxonomy) {
  if (counts.causes() != taxonomy.size()) throw std::invalid_argument("from_counts: cause count mismatch");
  std::map<EventId, ScoreRow> rows;
  for (const auto& [id, cells] : counts.rows) {
    ScoreRow row;
    row.kind = nonzero_cells(cells) == 1 ? RowKind::single : RowKind::multi;
    row.scores.reserve(cells.size());
    for (const auto c : cells) row.scores.push_back(static_cast<double>(c));
    rows.emplace(id, std::move(row));
  }
  return ScoreTable(std::move(taxonomy), counts.total, counts.per_cause,
                    compute_icf(counts.total, counts.per_cause), std::move(rows), TableStage::counted);
}

const ScoreRow* ScoreTable::find(EventId id) const {
  const auto it = rows_.find(id);
  return it == rows_.end() ? nullptr : &it->second;
}

CauseId ScoreTable::majority_cause() const {
  CauseId best = 0;
  for (CauseId j = 1; j < per_cause_.size(); ++j) {
    if (per_cause_[j] > per_cause_[best]) best = j;
  }
  return best;
}

ScoreTable ScoreTable::reweighted() const {
  require_stage(*this, TableStage::counted, "reweighted");
  ScoreTable out = *this;
  for (auto& [id, row] : out.rows_) {
    std::vector<std::uint64_t> cells;
    cells.reserve(row.scores.size());
    for (const double s : row.scores) cells.push_back(static_cast<std::uint64_t>(s));
    row.scores = reweight(cells);
  }
  out.stage_ = TableStage::reweighted;
  return out;
}

ScoreTable ScoreTable::without_reweighting() const {
  require_stage(*this, TableStage::counted, "without_reweighting");
  ScoreTable out = *this;
  out.stage_ = TableStage::reweighted;
  return out;
}

ScoreTable ScoreTable::with_icf() const {
  require_stage(*this, TableStage::reweighted, "with_icf");
  ScoreTable out = *this;
  for (auto& [id, row] : out.rows_) {
    for (std::size_t j = 0; j < row.scores.size(); ++j) row.scores[j] *= icf_[j];
  }
  out.stage_ = TableStage::final_;
  return out;
}

ScoreTable ScoreTable::without_icf() const {
  require_stage(*this, TableStage::reweighted, "without_icf");
  ScoreTable out = *this;
  out.stage_ = TableStage::final_;
  return out;
}

std::uint64_t ScoreTable::fingerprint() const {
  std::ostringstream text;
  // write() insists on the final stage; hash the same fields directly.
  text << stage_name(stage_) << '\n' << to_string(variant_) << '\n' << total_ << '\n';
  for (const auto& name : taxonomy_.names) text << name << '\n';
  for (const auto n : per_cause_) text << n << '\t';
  for (const auto v : icf_) text << format_double(v) << '\t';
  for (const auto& [id, row] : rows_) {
    text << '\n' << to_string(id);
    for (const auto v : row.scores) text << '\t' << format_double(v);
    text << (row.kind == RowKind::single ? "\tsingle" : "\tmulti");
  }
  Fnv1a h;
  h.update(text.str());
  return h.digest();
}

// ---------------------------------------------------------------------------
// Persistence

namespace {

constexpr std::string_view kTableHeader = "ncc-table v1";

class FieldReader {
 public:
  explicit FieldReader(std::istream& in) : in_(in) {}

  std::vector<std::string> next(std::string_view name, std::size_t arity) {
    std::string line;
    if (!std::getline(in_, line)) throw FormatError("table: missing field '" + std::string(name) + "'");
    auto fields = split(line, '\t');
    if (fields[0] != name) throw FormatError("table: expected field '" + std::string(name) + "'");
    if (arity != 0 && fields.size() != arity) {
      throw FormatError("table: wrong arity for field '" + std::string(name) + "'");
    }
    return fields;
  }

  std::istream& stream() { return in_; }

 private:
  std::istream& in_;
};

std::uint64_t to_uint(const std::string& text, std::string_view field) {
  std::uint64_t v = 0;
  if (!parse_uint(text, v)) throw FormatError("table: bad value for '" + std::string(field) + "'");
  return v;
}

double to_real(const std::string& text, std::string_view field) {
  double v = 0;
  if (!parse_double(text, v) || !std::isfinite(v) || v < 0.0) {
    throw FormatError("table: bad value for '" + std::string(field) + "'");
  }
  return v;
}

}  // namespace

void ScoreTable::write(std::ostream& out) const {
  require_stage(*this, TableStage::final_, "write");
  out << kTableHeader << '\n';
  out << "variant\t" << to_string(variant_) << '\n';
  out << "K\t" << taxonomy_.size() << '\n';
  for (std::size_t j = 0; j < taxonomy_.size(); ++j) out << "cause\t" << j << '\t' << taxonomy_.names[j] << '\n';
  out << "N\t" << total_ << '\n';
  out << "Nj";
  for (const auto n : per_cause_) out << '\t' << n;
  out << "\nicf";
  for (const auto v : icf_) out << '\t' << format_double(v);
  out << "\nrows\t" << rows_.size() << '\n';
  for (const auto& [id, row] : rows_) {
    out << to_string(id);
    for (const auto v : row.scores) out << '\t' << format_double(v);
    out << '\t' << (row.kind == RowKind::single ? "single" : "multi") << '\n';
  }
}

ScoreTable ScoreTable::read(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("table: missing header");
  if (line != kTableHeader) {
    if (line.rfind("ncc-table ", 0) == 0) {
      throw FormatError("table: unsupported version '" + line.substr(10) + "' (expected v1)");
    }
    throw FormatError("table: expected header '" + std::string(kTableHeader) + "'");
  }
  FieldReader r(in);
  Variant variant;
  try {
    variant = parse_variant(r.next("variant", 2)[1]);
  } catch (const ValidationError&) {
    throw FormatError("table: bad value for 'variant'");
  }
  const auto k = to_uint(r.next("K", 2)[1], "K");
  if (k < 2 || k > 4096) throw FormatError("table: bad value for 'K'");
  CauseTaxonomy taxonomy;
  for (std::uint64_t j = 0; j < k; ++j) {
    const auto f = r.next("cause", 3);
    if (to_uint(f[1], "cause") != j) throw FormatError("table: bad value for 'cause'");
    taxonomy.names.push_back(f[2]);
  }
  const auto total = to_uint(r.next("N", 2)[1], "N");
  std::vector<std::uint64_t> per_cause;
  for (const auto& f : [&] { auto v = r.next("Nj", k + 1); v.erase(v.begin()); return v; }()) {
    per_cause.push_back(to_uint(f, "Nj"));
  }
  std::vector<double> icf;
  for (const auto& f : [&] { auto v = r.next("icf", k + 1); v.erase(v.begin()); return v; }()) {
    icf.push_back(to_real(f, "icf"));
  }
  const auto n_rows = to_uint(r.next("rows", 2)[1], "rows");
  std::map<EventId, ScoreRow> rows;
  for (std::uint64_t i = 0; i < n_rows; ++i) {
    if (!std::getline(in, line)) throw FormatError("table: truncated rows");
    const auto f = split(line, '\t');
    if (f.size() != k + 2) throw FormatError("table: wrong arity for field 'row'");
    const auto id = parse_event_id(f[0]);
    if (!id || *id == kUnknownEvent) throw FormatError("table: bad value for 'event_id'");
    ScoreRow row;
    for (std::uint64_t j = 0; j < k; ++j) row.scores.push_back(to_real(f[1 + j], "score"));
    if (f[k + 1] == "single") {
      row.kind = RowKind::single;
    } else if (f[k + 1] == "multi") {
      row.kind = RowKind::multi;
    } else {
      throw FormatError("table: bad value for 'kind'");
    }
    if (!rows.emplace(*id, std::move(row)).second) throw FormatError("table: duplicate row " + f[0]);
  }
  return ScoreTable(std::move(taxonomy), total, std::move(per_cause), std::move(icf), std::move(rows),
                    TableStage::final_, variant);
}

void save_table(const ScoreTable& table, const std::filesystem::path& path) {
  std::ostringstream out;
  table.write(out);
  write_text_file(path, out.str());
}

ScoreTable load_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read " + path.string());
  return ScoreTable::read(in);
}

// ---------------------------------------------------------------------------

TableBuild build_table(std::span<const EventSequence> passed, std::span<const EventSequence> failed,
                       std::span<const CauseId> labels, const CauseTaxonomy& taxonomy, Variant variant) {
  if (failed.empty()) throw ValidationError("no failed logs to learn from");
  TableBuild b;
  std::tie(b.passed_pool, b.failed_pool) = collect_pools(passed, failed);
  if (variant == Variant::drop1) {
    b.kept = b.failed_pool;
    if (b.kept.events.empty()) throw ValidationError("no events in failed logs");
  } else {
    b.kept = diff_with_pass(b.failed_pool, b.passed_pool);
  }
  b.counts = init_counts(b.kept, failed, labels, taxonomy.size());
  const ScoreTable counted = ScoreTable::from_counts(b.counts, taxonomy);
  const ScoreTable reweighted = variant == Variant::drop2 ? counted.without_reweighting() : counted.reweighted();
  b.table = variant == Variant::drop3 ? reweighted.without_icf() : reweighted.with_icf();
  b.table.set_variant(variant);
  return b;
}

}  // namespace ncc
