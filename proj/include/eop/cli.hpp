#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace eop::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Runs the eop command line. args excludes the program name. Tables and
// messages go to out/err; files are written atomically.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eop::cli
