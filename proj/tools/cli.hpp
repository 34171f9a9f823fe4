#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace tkgr::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

// Runs the command line `args` (args[0] is the program name) and returns the
// process exit code. Regular output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace tkgr::cli
