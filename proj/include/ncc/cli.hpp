#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ncc::cli {

// Exit codes.
inline constexpr int kOk = 0;
inline constexpr int kValidationError = 1;
inline constexpr int kIoError = 2;

// Subcommands: gen, train, predict, eval, ablate. `--help` lists flags.
int run(int argc, char** argv, std::ostream& out, std::ostream& err);
// Same, with args[0] as the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ncc::cli
