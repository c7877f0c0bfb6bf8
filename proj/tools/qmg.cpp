#include <iostream>
#include <string>
#include <vector>

#include "qmg/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return qmg::cli::run(args, std::cout, std::cerr);
}
