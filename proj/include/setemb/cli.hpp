#pragma once

#include <iosfwd>
#include <string_view>

namespace setemb {

inline constexpr std::string_view kVersion = "0.1.0";

/// Exit codes of the command-line tool.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitDivergence = 3 };

/// Runs the `setemb` command line. argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace setemb
