#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ghostgame {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInput = 1;  // bad flags, unreadable or invalid config
inline constexpr int kExitMath = 2;   // validation failure or no equilibrium

/// Environment variable that overrides sim.seed (below --set in precedence).
inline constexpr const char* kSeedEnv = "GHOSTGAME_SEED";

/// Runs one subcommand; `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ghostgame
