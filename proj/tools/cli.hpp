#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace blindmm::cli {

/// Exit statuses.
inline constexpr int kOk = 0;
inline constexpr int kUsage = 2;
inline constexpr int kData = 3;
inline constexpr int kDegenerate = 4;

/// Runs the command line `args` (without the program name).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace blindmm::cli
