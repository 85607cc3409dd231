#pragma once

#include <string>
#include <vector>

namespace foldsail::cli {

/// Runs one subcommand. `args` excludes the program name. Returns the
/// process exit code: 0 success, 2 infeasible optimization, 3 invalid
/// configuration or model, 1 any other failure.
int run(const std::vector<std::string>& args);

}  // namespace foldsail::cli
