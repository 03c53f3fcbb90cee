#include <string>
#include <vector>

#include "isac/commands.hpp"

int main(int argc, char** argv) {
  return isac::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
