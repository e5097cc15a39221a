#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ncc/corpus.hpp"
#include "ncc/synthetic.hpp"

namespace ncc::testing {

// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// A failed run and a passed run of the same test case. Five of the eight
// failed lines also occur (modulo parameters) in the passed run.
extern const std::vector<std::string> kSnippetFailedLines;
extern const std::vector<std::string> kSnippetPassedLines;
// The three failed lines with no passed counterpart.
extern const std::vector<std::string> kSnippetDiscriminativeLines;

Corpus snippet_corpus();

// Eleven failed logs. The "slave board" line occurs in 2/4/1/3 logs of
// causes C1..C4; the "link flap" line occurs in all five C2 logs only.
inline const std::string kSlaveBoardLine = "Error: The slave board is not in position.";
inline const std::string kLinkFlapLine = "Warning: link flap detected on uplink port";
Corpus worked_example_corpus();

// Small planted corpus with a fixed, modest size; used by many tests.
SyntheticSpec small_spec(std::uint64_t seed, std::vector<std::size_t> counts = {12, 8, 6, 4},
                         std::size_t passed = 6);

// Lines from a small vocabulary with randomized numbers, addresses and
// paths, lengths 1..9. Many shapes repeat so templates merge.
std::vector<std::string> fuzzed_lines(std::uint64_t seed, std::size_t n);

std::string read_file(const std::filesystem::path& path);

}  // namespace ncc::testing
