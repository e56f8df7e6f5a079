#pragma once

#include <iosfwd>

namespace khess {

/// Process exit codes of the khess command.
enum ExitCode : int {
  exit_ok = 0,
  exit_usage = 1,
  exit_numerical = 2,
  exit_hypothesis = 3,
};

/// Entry point behind the khess executable. Reports go to `out`; failures
/// are written to `err` as a JSON object with an error category and message.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace khess
