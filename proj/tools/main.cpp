#include "khx/cli.hpp"

int main(int argc, char** argv) {
  return khx::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
