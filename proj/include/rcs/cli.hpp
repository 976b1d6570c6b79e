#pragma once

#include <iosfwd>

namespace rcs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitViolation = 2;

/// Parses arguments, runs one subcommand and writes its report to `out` (or
/// the --output file). Returns 0 on success, 1 on usage or input errors and
/// 2 when a Monte Carlo check reports a VIOLATION.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rcs::cli
