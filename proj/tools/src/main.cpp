#include <iostream>
#include <string>
#include <vector>

#include "hbf_cli/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hbf::cli::dispatch(args, std::cout, std::cerr);
}
