#include <iostream>
#include <string>
#include <vector>

#include "sltdr/experiment.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sltdr::run_cli(args, std::cout, std::cerr);
}
