#include <iostream>

#include "mapfast/cli.hpp"

int main(int argc, char** argv) {
  return mapfast::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
