#include <iostream>
#include <string>
#include <vector>

#include "msrate/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return msrate::cli::run(args, std::cout, std::cerr);
}
