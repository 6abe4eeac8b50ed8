#include <iostream>
#include <string>
#include <vector>

#include "fairmatch/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fairmatch::cli_dispatch(args, std::cout, std::cerr);
}
