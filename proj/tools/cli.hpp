#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace polwishart::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDomainError = 1;
inline constexpr int kExitUsageError = 2;

/// Runs one command line. `args` excludes the program name. Results go to `out` (or to
/// the file named by --out), diagnostics to `err`. Domain errors print
/// "error: <ErrorCode>: <message>" and return 1; usage errors return 2.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace polwishart::cli
