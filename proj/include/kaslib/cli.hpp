#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kas {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Entry point of the kaslib command-line tool. `args` excludes the program
/// name. Subcommands: generate, run-benchmark, tune, fit, predict, compare.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Applies KASLIB_LOG (error, info or debug) to the global logger.
void configure_logging_from_env();

}  // namespace kas
