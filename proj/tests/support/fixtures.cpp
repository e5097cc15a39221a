#include "support/fixtures.hpp"

#include <atomic>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <unistd.h>

namespace ncc::testing {

namespace fs = std::filesystem;

TempDir::TempDir() {
  static std::atomic<unsigned> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("ncc-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++) + "-" + std::to_string(rd()));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

const std::vector<std::string> kSnippetFailedLines = {
    "<240K-5>system-view",
    "return user view R75",
    "Error: The slave board is not in position.",
    "Warning: checkpoint rollback aborted by device",
    "<240K-5>delete rollback checkpoint",
    "Info: Operation failed, retry count 3 exceeded",
    "cmd.pathinfo=/usr/local/cmd/cfg.rb:259",
    "Test step finished",
};

const std::vector<std::string> kSnippetPassedLines = {
    "<240K-5>system-view",
    "return user view R80",
    "<240K-5>delete rollback checkpoint",
    "cmd.pathinfo=/usr/local/cmd/cfg.rb:357",
    "Test step finished",
};

const std::vector<std::string> kSnippetDiscriminativeLines = {
    "Error: The slave board is not in position.",
    "Warning: checkpoint rollback aborted by device",
    "Info: Operation failed, retry count 3 exceeded",
};

Corpus snippet_corpus() {
  Corpus c;
  c.taxonomy = CauseTaxonomy::standard();
  c.passed.push_back({"passed-snippet", kSnippetPassedLines});
  c.failed.push_back({"failed-snippet", kSnippetFailedLines, 1});
  return c;
}

Corpus worked_example_corpus() {
  Corpus c;
  c.taxonomy = CauseTaxonomy::standard();
  c.passed.push_back({"passed-0", {"Test step started", "Test step finished"}});
  // (cause, has slave board line, has link flap line)
  struct Row {
    CauseId cause;
    bool board;
    bool flap;
  };
  const std::vector<Row> rows = {
      {0, true, false}, {0, true, false},                                       // C1: 2
      {1, true, true},  {1, true, true},  {1, true, true}, {1, true, true},     // C2: 4 (+ flap)
      {1, false, true},                                                         // C2 fifth flap log
      {2, true, false},                                                         // C3: 1
      {3, true, false}, {3, true, false}, {3, true, false},                     // C4: 3
  };
  for (std::size_t i = 0; i < rows.size(); ++i) {
    std::vector<std::string> lines = {"Test step started"};
    if (rows[i].board) lines.push_back(kSlaveBoardLine);
    if (rows[i].flap) lines.push_back(kLinkFlapLine);
    lines.push_back("Test step finished");
    char id[32];
    std::snprintf(id, sizeof id, "failed-%02zu", i);
    c.failed.push_back({id, lines, rows[i].cause});
  }
  return c;
}

SyntheticSpec small_spec(std::uint64_t seed, std::vector<std::size_t> counts, std::size_t passed) {
  SyntheticSpec spec = default_synthetic_spec(std::move(counts), passed, seed, 2, 10, 2);
  spec.min_lines = 8;
  spec.max_lines = 16;
  return spec;
}

std::vector<std::string> fuzzed_lines(std::uint64_t seed, std::size_t n) {
  static const std::vector<std::string> words = {
      "connect", "to",    "host",  "failed", "retry",  "timeout", "ok",    "error:", "Took",  "seconds",
      "build",   "check", "board", "slave",  "device", "session", "open",  "close",  "user",  "view",
      "R75",     "k8s",   "v2",    "a=b",    "[warn]", "value:",  "done.", "step",   "queue", "flush"};
  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
  std::vector<std::string> out;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t len = 1 + pick(9);
    std::string line;
    for (std::size_t t = 0; t < len; ++t) {
      if (!line.empty()) line += ' ';
      switch (pick(8)) {
        case 0: line += std::to_string(pick(100000)); break;
        case 1: line += "10.0." + std::to_string(pick(256)) + "." + std::to_string(pick(256)); break;
        case 2: line += "/var/log/app" + std::to_string(pick(5)) + ".log:" + std::to_string(pick(900)); break;
        case 3: line += "0x" + std::to_string(pick(0xffff)) + "ab"; break;
        default: line += words[pick(words.size() / (1 + t % 3))]; break;
      }
    }
    out.push_back(line);
  }
  return out;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace ncc::testing
