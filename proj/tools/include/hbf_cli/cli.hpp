#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hbf::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kSolverError = 2 };

/// Runs `hbf <subcommand> [config] [flags]`; `args` excludes the program
/// name. Data goes to files under --out, progress and diagnostics to `err`,
/// help text to `out`.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace hbf::cli
