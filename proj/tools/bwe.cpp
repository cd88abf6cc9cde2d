#include <iostream>

#include "bwe/cli/cli.hpp"

int main(int argc, char** argv) {
  return bwe::cli::run({argv + 1, argv + argc}, std::cout, std::cerr);
}
