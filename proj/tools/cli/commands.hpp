#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace stockcast::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;
inline constexpr int kExitUsage = 64;

// Full command line without the program name. Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace stockcast::cli
