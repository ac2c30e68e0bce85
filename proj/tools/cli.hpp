#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cvarbandit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitRuntime = 3;

/// Entry point of the `cvar_bandit` tool; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cvarbandit::cli
