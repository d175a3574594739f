#include "dissolve/cli.hpp"

int main(int argc, char** argv) {
  return dissolve::run_cli(std::vector<std::string>(argv, argv + argc));
}
