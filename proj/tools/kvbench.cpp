#include <iostream>

#include "kvbench/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return kvbench::cli::run_cli(args, std::cout, std::cerr);
}
