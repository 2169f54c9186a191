#include <iostream>
#include <string>
#include <vector>

#include "kaslib/cli.hpp"

int main(int argc, char** argv) {
  kas::configure_logging_from_env();
  std::vector<std::string> args(argv + 1, argv + argc);
  return kas::run_cli(args, std::cout, std::cerr);
}
