#pragma once

#include <iosfwd>

namespace unext {

// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitInfeasible = 2,
  kExitInconclusive = 3,
  kExitNumerical = 4,
};

/// Runs the `unext` command line (bound, figure, np, check, selftest) with
/// output on `out` and diagnostics on `err`. Returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace unext
