#pragma once

#include <iosfwd>

namespace fdrsel {

/// Exit codes of the command-line tool.
enum ExitCode : int {
    exit_ok = 0,
    exit_usage = 1,
    exit_data = 2,  ///< unreadable or invalid input
    exit_fit = 3,   ///< a fit or search failed
};

/**
 * Entry point of the `fdrsel` tool. Subcommands: select, slope, lasso,
 * knockoff, simulate, threshold, demo-data. Messages go to `out` and `err`;
 * results are written to the --out directory.
 */
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace fdrsel
