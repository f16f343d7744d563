#include <iostream>

#include "dmab/cli.hpp"

int main(int argc, char** argv) {
  return dmab::cli_main(argc, argv, std::cout, std::cerr);
}
