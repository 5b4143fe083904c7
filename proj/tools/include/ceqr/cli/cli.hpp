#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ceqr::cli {

enum ExitCode : int { ok = 0, runtime_failure = 1, config_error = 2 };

/// Entry point behind the `ceqr` executable. `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ceqr::cli
