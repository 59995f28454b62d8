#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace fha {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    kExitOk = 0,
    /// Verification or comparison failed.
    kExitFailed = 1,
    /// Bad flags, unreadable or malformed model/plan/trace, infeasible plan.
    kExitInput = 2,
    /// Simulation aborted: Zeno chain, nondeterminism or a domain error.
    kExitRuntime = 3,
};

/// Runs one subcommand.  `args` excludes the program name; reports go to
/// `out`, diagnostics to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace fha
