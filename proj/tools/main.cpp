#include <string>
#include <vector>

#include "absa/cli.hpp"

int main(int argc, char** argv) {
  return absa::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
