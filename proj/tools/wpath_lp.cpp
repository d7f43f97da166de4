#include <iostream>

#include "wpath/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return wpath::run(args, std::cout, std::cerr);
}
