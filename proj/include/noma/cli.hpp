#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace noma::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point for `generate`, `solve`, `evaluate` and `validate`.
/// Results go to `out`, the resolved configuration and diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

} // namespace noma::cli
