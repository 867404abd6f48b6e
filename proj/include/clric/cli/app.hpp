#pragma once

#include <cstdint>
#include <ostream>
#include <span>

namespace clric::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;  // bad flags, unreadable or malformed input files
inline constexpr int kExitCorrupt = 3;  // a .clrc file failed to parse or decode
inline constexpr int kExitTraining = 4;

inline constexpr int kJsonSchemaVersion = 1;

// Entry point of the `clric` binary. JSON results go to `out`, progress and
// diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

// FNV-1a over the little-endian bytes of each float.
std::uint64_t fnv1a64(std::span<const float> values);

}  // namespace clric::cli
