#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace scaleqm {

/// Exit codes of the command-line front end.
enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,
  kExitNonConvergence = 2,
  kExitLint = 3,
};

/// Runs `scaleqm <subcommand> ...`; `args` excludes the program name.
/// Results go to `out` (or the --out file), diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace scaleqm
