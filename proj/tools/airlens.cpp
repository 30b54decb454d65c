#include <iostream>
#include <string>
#include <vector>

#include "airlens/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return airlens::cli::run(args, std::cout, std::cerr);
}
