#include <iostream>

#include "lanefree/cli.hpp"

int main(int argc, char** argv) {
  return lanefree::cli::run(argc, argv, std::cout, std::cerr);
}
