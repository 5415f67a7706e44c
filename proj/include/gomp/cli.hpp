#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gomp::cli {

enum ExitCode : int {
  kOk = 0,
  kViolations = 1,  // verify-theory ran but some check failed
  kConfigError = 2,
  kBudgetRefused = 3,
  kNumericFailure = 4,
  kInternalError = 5,
};

/// Runs one command. `args` excludes the program name. Results go to `out`
/// unless --out names a file; errors go to `err` as a JSON object.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gomp::cli
