#include <iostream>

#include "stylegraph/cli.hpp"

int main(int argc, char** argv) {
  return stylegraph::run_cli(argc, argv, std::cout, std::cerr);
}
