#include <iostream>

#include "herogcn_cli.hpp"

int main(int argc, char** argv) {
  return herogcn::cli::run_cli(argc, argv, std::cout, std::cerr);
}
