#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace openq {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitUsage = 2,
  /// A pole guard or a divergence check tripped.
  kExitGuard = 3,
};

/// Runs one CLI invocation; `args` excludes the program name. The JSON report
/// goes to `out` unless --output names a file.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace openq
