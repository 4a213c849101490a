#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace pitomo::cli {

enum ExitCode : int { kOk = 0, kNotConverged = 1, kInputError = 2 };

/// Runs one command line (without the program name). Reports go to `out`,
/// diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pitomo::cli
