#pragma once

#include <cstdint>
#include <random>

namespace tandem {

/// Independent stream for (master seed, index, salt). Streams depend only on
/// these three numbers, so results do not change with the thread count.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                      static_cast<std::uint32_t>(salt), static_cast<std::uint32_t>(salt >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace tandem
