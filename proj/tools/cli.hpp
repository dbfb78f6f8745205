#pragma once

#include <string>
#include <vector>

namespace cortexa::cli {

/// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFatal = 1;
inline constexpr int kExitPartial = 2;

/// Parses and runs one command line; never throws.
int run(const std::vector<std::string>& args);

}  // namespace cortexa::cli
