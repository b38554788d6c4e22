#pragma once

#include <iosfwd>

namespace porous {

/// Exit codes of the command-line front end.
enum ExitCode : int { kExitPass = 0, kExitInput = 1, kExitFail = 2, kExitIndeterminate = 3 };

/// Subcommands build, audit and report. Diagnostics go to `err`, progress to `out`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace porous
