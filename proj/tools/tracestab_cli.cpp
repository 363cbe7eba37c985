#include <iostream>

#include "tracestab/cli.hpp"

int main(int argc, char** argv) {
  return tracestab::cli::main_entry(argc, argv, std::cout, std::cerr);
}
