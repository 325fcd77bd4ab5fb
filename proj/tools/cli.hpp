#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dropnet::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitComputation = 2;

/// Runs the dropnet command line on `args` (program name excluded).
/// Exit codes: 0 success, 1 usage, config or I/O error, 2 computation error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dropnet::cli
