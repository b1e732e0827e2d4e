#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rebalance::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_runtime_error = 1;
inline constexpr int exit_usage_error = 2;

/// Runs the tool with `args` (program name excluded); returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace rebalance::cli
