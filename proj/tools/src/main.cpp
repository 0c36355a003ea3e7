#include <iostream>

#include "balkwise/cli/app.hpp"

int main(int argc, char** argv) {
  return balkwise::cli::run_cli(argc, argv, std::cout, std::cerr);
}
