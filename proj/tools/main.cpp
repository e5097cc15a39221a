#include <iostream>

#include "ncc/cli.hpp"

int main(int argc, char** argv) {
  return ncc::cli::run(argc, argv, std::cout, std::cerr);
}
