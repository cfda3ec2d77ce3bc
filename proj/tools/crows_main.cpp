#include <string>
#include <vector>

#include "crows/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return crows::run_cli(args);
}
