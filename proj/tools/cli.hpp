#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eamon::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kSuccess = 0,
  kUsage = 2,
  kInputFormat = 3,
  kPrecondition = 4,
};

/// Runs the tool with argv-style arguments (args[0] is the program name). Data goes to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eamon::cli
