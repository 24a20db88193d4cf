#include <iostream>

#include "srd/cli.hpp"

int main(int argc, char** argv) {
  return srd::run_cli(argc, argv, std::cout, std::cerr);
}
