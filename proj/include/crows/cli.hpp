#pragma once

#include <string>
#include <vector>

namespace crows {

/// Entry point for the command-line tool. `args` holds the command line
/// without the program name. Returns the process exit code: 0 on success,
/// 2 for parameter errors (including flag parsing), 3 for malformed input
/// data, 1 for anything else (internal failures, replay mismatches).
int run_cli(const std::vector<std::string>& args);

/// Parse a capacity list like "2..12,16,20..31" into ascending values.
/// Exposed for tests. Throws param_error on malformed specs.
std::vector<int> parse_capacity_list(const std::string& spec);

}  // namespace crows
