#include <iostream>
#include <string>
#include <vector>

#include "infercost/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return infercost::cli_dispatch(args, std::cout, std::cerr);
}
