#pragma once
#include <string>
#include <vector>

namespace cslab {

/// Dispatches one subcommand (simulate, sticky, sweep, relations, analyze,
/// validate). args excludes the program name. Returns the process exit code:
/// 0 success, 1 invalid configuration or usage, 2 numerical blowup.
int run_command(const std::vector<std::string>& args);

} // namespace cslab
