#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crowncount {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Subcommands: synth, train, segment, count, bench, filter.
/// argv[0] is the program name.
int cli_main(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

}  // namespace crowncount
