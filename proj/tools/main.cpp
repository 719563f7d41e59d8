#include <iostream>
#include <string>
#include <vector>

#include "hypbound/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hypbound::cli::run(args, std::cout, std::cerr);
}
