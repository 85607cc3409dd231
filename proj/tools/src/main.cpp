#include "foldsail/cli.hpp"

int main(int argc, char** argv) {
  return foldsail::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
