#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace gridreconf::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_failed = 1;  // infeasible, diverged or invalid case
inline constexpr int exit_usage = 2;   // bad arguments or unreadable input

/// Subcommands: validate, powerflow, reconfigure. Diagnostics go to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gridreconf::cli
