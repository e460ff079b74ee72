#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace lossless_sof::cli {

/// Process exit codes shared by every subcommand.
enum ExitCode : int {
  kSuccess = 0,
  /// Usage, parse or I/O error.
  kError = 1,
  /// The check ran and the answer is negative (infeasible, invalid, ...).
  kNegative = 2,
  /// Synthesis hit its iteration limit.
  kIterationLimit = 3,
};

/// Runs the command line `args` (args[0] is the program name). Machine
/// output goes to `out`, diagnostics to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace lossless_sof::cli
