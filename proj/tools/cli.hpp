#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tissuefit::cli {

enum ExitCode : int {
  kSuccess = 0,
  kValidationError = 1,
  kNumericalFailure = 2,
  kNonConvergence = 3,
};

/// Runs one command line (args excludes the program name).
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tissuefit::cli
