#include <iostream>

#include "fgff/cli.hpp"

int main(int argc, char** argv) {
  return fgff::cli::run(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
