#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace gpdiag {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

/// Runs one command line (args excludes the program name). Files go to
/// --out-dir; progress goes to `out` and error messages to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace gpdiag
