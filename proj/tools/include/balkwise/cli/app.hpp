#pragma once

#include <iosfwd>

namespace balkwise::cli {

/// Exit codes of the command-line tool.
enum ExitCode : int { kSuccess = 0, kValidationError = 1, kRuntimeError = 2 };

/// Entry point of the `balkwise` tool; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace balkwise::cli
