#include <iostream>
#include <string>
#include <vector>

#include "app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return bethe3::cli::run_cli(std::move(args), std::cout, std::cerr);
}
