#include <iostream>
#include <string>
#include <vector>

#include "coarsen/cli.hpp"

int main(int argc, char** argv) {
  return coarsen::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
