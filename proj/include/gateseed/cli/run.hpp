#pragma once

#include <string>
#include <vector>

namespace gateseed::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitRuntime = 2;

// Entry point of the `gateseed` tool. Returns 0 on success (and for --help),
// 1 on usage errors, 2 on runtime failures.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);  // args[0] is the program name

}  // namespace gateseed::cli
