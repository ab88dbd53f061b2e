#include <iostream>
#include <string>
#include <vector>

#include "gelscan/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gelscan::run_cli(args, std::cout, std::cerr);
}
