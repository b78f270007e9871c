#include <iostream>

#include "texfair/cli.hpp"

int main(int argc, char** argv) {
  return texfair::run_cli(argc, argv, std::cout, std::cerr);
}
