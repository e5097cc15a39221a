#include "ncc/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include "ncc/errors.hpp"
#include "ncc/text_io.hpp"

namespace ncc {

namespace fs = std::filesystem;

void CauseTaxonomy::validate() const {
  if (names.size() < 2) throw ValidationError("taxonomy needs at least two causes");
  for (const auto& name : names) {
    if (name.empty() || name.find_first_of("\t\n\r,") != std::string::npos) {
      throw ValidationError("invalid cause name '" + name + "'");
    }
  }
}

CauseTaxonomy CauseTaxonomy::standard() {
  return {{"bug-related", "environmental", "test-script", "third-party-library"}};
}

CauseTaxonomy CauseTaxonomy::from_list(const std::string& comma_separated) {
  CauseTaxonomy taxonomy;
  for (const auto& part : split(comma_separated, ',')) taxonomy.names.emplace_back(trim(part));
  taxonomy.validate();
  return taxonomy;
}

std::vector<std::uint64_t> Corpus::cause_counts() const {
  std::vector<std::uint64_t> counts(taxonomy.size(), 0);
  for (const auto& log : failed) ++counts.at(log.cause);
  return counts;
}

std::vector<CauseId> Corpus::labels() const {
  std::vector<CauseId> out;
  out.reserve(failed.size());
  for (const auto& log : failed) out.push_back(log.cause);
  return out;
}

void Corpus::validate() const {
  taxonomy.validate();
  std::set<std::string> ids;
  std::vector<std::string> problems;
  for (const auto& log : passed) {
    if (!ids.insert(log.id).second) problems.push_back("duplicate log id '" + log.id + "'");
  }
  for (const auto& log : failed) {
    if (!ids.insert(log.id).second) problems.push_back("duplicate log id '" + log.id + "'");
    if (log.cause >= taxonomy.size()) {
      problems.push_back("log '" + log.id + "' has unknown cause " + std::to_string(log.cause));
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid corpus:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
}

// ---------------------------------------------------------------------------

std::map<std::string, CauseId> read_labels(const fs::path& path, const CauseTaxonomy& taxonomy) {
  const auto lines = read_lines(path);
  std::map<std::string, CauseId> labels;
  std::vector<std::string> problems;
  bool header_seen = false;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    const std::string where = path.filename().string() + ":" + std::to_string(i + 1);
    if (!header_seen) {
      header_seen = true;
      if (fields.size() == 2 && trim(fields[0]) == "log_id" && trim(fields[1]) == "cause_id") continue;
      throw ValidationError(where + ": expected header 'log_id,cause_id'");
    }
    if (fields.size() != 2) {
      problems.push_back(where + ": expected 2 fields");
      continue;
    }
    const std::string id(trim(fields[0]));
    std::uint64_t cause = 0;
    if (id.empty() || !parse_uint(trim(fields[1]), cause)) {
      problems.push_back(where + ": malformed row '" + std::string(line) + "'");
    } else if (cause >= taxonomy.size()) {
      problems.push_back(where + ": unknown cause id " + std::to_string(cause) + " for '" + id +
                         "' (taxonomy has " + std::to_string(taxonomy.size()) + " causes)");
    } else if (!labels.emplace(id, static_cast<CauseId>(cause)).second) {
      problems.push_back(where + ": duplicate label for '" + id + "'");
    }
  }
  if (!header_seen) throw ValidationError(path.string() + ": empty labels file");
  if (!problems.empty()) {
    std::string msg = "invalid labels:";
    for (const auto& p : problems) msg += "\n  " + p;
    throw ValidationError(msg);
  }
  return labels;
}

void write_labels(const fs::path& path, const std::vector<LabeledFailedLog>& failed) {
  std::ostringstream out;
  out << "log_id,cause_id\n";
  for (const auto& log : failed) out << log.id << ',' << log.cause << '\n';
  write_text_file(path, out.str());
}

namespace {

std::vector<fs::path> list_logs(const fs::path& dir) {
  std::vector<fs::path> files;
  std::error_code ec;
  if (!fs::exists(dir, ec)) return files;
  if (!fs::is_directory(dir, ec)) throw IoError(dir.string() + " is not a directory");
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".log") files.push_back(entry.path());
  }
  if (ec) throw IoError("cannot list " + dir.string() + ": " + ec.message());
  std::sort(files.begin(), files.end());
  return files;
}

}  // namespace

Corpus load_corpus(const fs::path& root, const fs::path& labels_path, const CauseTaxonomy& taxonomy) {
  taxonomy.validate();
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("corpus directory not found: " + root.string());

  Corpus corpus;
  corpus.taxonomy = taxonomy;
  for (const auto& file : list_logs(root / "passed")) {
    corpus.passed.push_back({file.stem().string(), read_lines(file)});
  }
  const auto failed_files = list_logs(root / "failed");
  if (failed_files.empty() && !fs::exists(labels_path, ec)) {
    corpus.validate();
    return corpus;
  }
  const auto labels = read_labels(labels_path, taxonomy);

  std::vector<std::string> unlabeled;
  std::set<std::string> present;
  for (const auto& file : failed_files) {
    const std::string id = file.stem().string();
    present.insert(id);
    const auto it = labels.find(id);
    if (it == labels.end()) {
      unlabeled.push_back(id);
      continue;
    }
    corpus.failed.push_back({id, read_lines(file), it->second});
  }
  std::vector<std::string> orphaned;
  for (const auto& [id, cause] : labels) {
    if (!present.count(id)) orphaned.push_back(id);
  }
  if (!unlabeled.empty() || !orphaned.empty()) {
    std::string msg = "corpus validation failed:";
    for (const auto& id : unlabeled) msg += "\n  failed log '" + id + "' has no label";
    for (const auto& id : orphaned) msg += "\n  label for '" + id + "' references no failed log";
    throw ValidationError(msg);
  }
  corpus.validate();
  return corpus;
}

void write_corpus(const Corpus& corpus, const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root / "passed", ec);
  if (!ec) fs::create_directories(root / "failed", ec);
  if (ec) throw IoError("cannot create " + root.string() + ": " + ec.message());
  auto write_log = [](const fs::path& file, const std::vector<std::string>& lines) {
    std::string text;
    for (const auto& line : lines) {
      text += line;
      text += '\n';
    }
    write_text_file(file, text);
  };
  for (const auto& log : corpus.passed) write_log(root / "passed" / (log.id + ".log"), log.lines);
  for (const auto& log : corpus.failed) write_log(root / "failed" / (log.id + ".log"), log.lines);
  write_labels(root / "labels.csv", corpus.failed);
}

// ---------------------------------------------------------------------------

std::size_t stratified_test_count(std::size_t count, double test_fraction) {
  if (count < 2) return 0;
  const double target = static_cast<double>(count) * test_fraction - 1e-9;
  const auto n = static_cast<std::size_t>(std::max(0.0, std::ceil(target)));
  return std::clamp<std::size_t>(n, 1, count - 1);
}

std::pair<Corpus, Corpus> split(const Corpus& corpus, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ValidationError("test fraction must lie in (0, 1)");
  }
  Corpus train;
  Corpus test;
  train.taxonomy = test.taxonomy = corpus.taxonomy;
  train.passed = corpus.passed;

  std::vector<std::vector<const LabeledFailedLog*>> by_cause(corpus.taxonomy.size());
  for (const auto& log : corpus.failed) by_cause.at(log.cause).push_back(&log);

  std::mt19937_64 rng(seed);
  for (auto& group : by_cause) {
    std::sort(group.begin(), group.end(), [](auto* a, auto* b) { return a->id < b->id; });
    // Fisher-Yates.
    for (std::size_t i = group.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng() % i);
      std::swap(group[i - 1], group[j]);
    }
    const std::size_t n_test = stratified_test_count(group.size(), test_fraction);
    for (std::size_t i = 0; i < group.size(); ++i) {
      (i < n_test ? test : train).failed.push_back(*group[i]);
    }
  }
  auto by_id = [](const auto& a, const auto& b) { return a.id < b.id; };
  std::sort(train.failed.begin(), train.failed.end(), by_id);
  std::sort(test.failed.begin(), test.failed.end(), by_id);
  return {std::move(train), std::move(test)};
}

}  // namespace ncc
