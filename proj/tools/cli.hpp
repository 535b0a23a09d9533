#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pseudopop::cli {

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitConvergence = 3;

/// Runs the command line `args` (args[0] is the program name). Results go to
/// `out` unless --output names a file; diagnostics and the resolved
/// configuration go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// "est (lo,hi)" with each number rounded to 2 decimals and printed without
/// trailing zeros.
std::string format_estimate(double est, double lo, double hi);

/// Round to 2 decimals, shortest text ("0.6", "-0.42", "0").
std::string round2(double value);

}  // namespace pseudopop::cli
