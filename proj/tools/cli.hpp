#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace kasner::cli {

/// Exit codes shared by every command.
inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInvalidModel = 2;
inline constexpr int kExitSolver = 3;
inline constexpr int kExitUsage = 64;

/// Runs one command line (args[0] is the program name). Reports go to
/// `out`, diagnostics to `err`; files named by --out are written directly.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kasner::cli
