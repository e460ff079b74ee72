#include <iostream>
#include <string>
#include <vector>

#include "lossless_sof/cli.h"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return lossless_sof::cli::Run(args, std::cout, std::cerr);
}
