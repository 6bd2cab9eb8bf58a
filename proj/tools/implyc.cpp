#include <iostream>
#include <string>
#include <vector>

#include "imply/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return imply::cli::main(args, std::cout, std::cerr);
}
