#include <string>
#include <vector>

#include "densewarp_cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return densewarp::cli::run(args);
}
