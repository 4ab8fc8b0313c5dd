#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace confee::cli {

/// Exit codes of `confee validate`; other commands use ok / error only.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitViolation = 2;

/// Runs the command line `args` (without the program name). Reports and CSV
/// go to `--out` when given, otherwise to `out`; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace confee::cli
