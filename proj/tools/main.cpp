#include <iostream>

#include "quadosc/cli.hpp"

int main(int argc, char** argv) {
  return quadosc::run_cli(argc, argv, std::cout, std::cerr);
}
