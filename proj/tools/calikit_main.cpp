#include <string>
#include <vector>

#include "calikit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return calikit::cli_dispatch(args);
}
