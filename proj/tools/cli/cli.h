#ifndef LINRANK_TOOLS_CLI_H_
#define LINRANK_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace linrank::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitSolverFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitUnsatisfiable = 3;

// Runs the command line `args` (args[0] is the program name), writing
// reports to `out` (or --out) and diagnostics to `err`.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Parses weights given as a JSON array, a report object with "weights", or
// numbers separated by commas or whitespace.
std::vector<double> ParseWeightsText(const std::string& text);

}  // namespace linrank::cli

#endif  // LINRANK_TOOLS_CLI_H_
