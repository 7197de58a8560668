#include <string>
#include <vector>

#include "souschef/cli_app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return souschef::cli::run_cli(args);
}
