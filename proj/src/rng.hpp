#pragma once

#include <cstdint>
#include <random>

namespace xva::detail {

// One independent engine per (seed, path, purpose): results do not depend on
// how paths are scheduled.
inline std::mt19937_64 path_stream(std::uint64_t seed, std::uint64_t path, std::uint32_t purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32), purpose};
    return std::mt19937_64(seq);
}

enum Purpose : std::uint32_t { kBrownian = 0, kDefaults = 1 };

}  // namespace xva::detail
