#include <iostream>
#include <string>
#include <vector>

#include "taxi_rhc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return rhc::cli::run(args, std::cout, std::cerr);
}
