#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace infercost {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Runs one subcommand. `args` excludes the program name. Returns 0 on
/// success, 1 on usage errors (synopsis on `err`), 2 on data errors.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace infercost
