#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fairmatch {

enum ExitCode : int {
  kExitOk = 0,
  kExitUsage = 1,  // bad arguments or invalid input
  kExitInfeasible = 2,
  kExitInternal = 3,
};

/// Runs one command line (without the program name). JSON results go to
/// `out`, diagnostics to `err`.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fairmatch
