#include <iostream>

#include "ceqr/cli/cli.hpp"

int main(int argc, char** argv) {
  return ceqr::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
