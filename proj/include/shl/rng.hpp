// Seeded per-stream engines: one independent generator per (master seed, stream index).
#pragma once

#include <cstdint>
#include <random>

namespace shl {

struct SeedPath {
    std::uint64_t master = 0;
    std::uint64_t stream = 0;
};

// Engine state depends only on the seed path, so samples are independent of
// the order in which streams are evaluated.
inline std::mt19937_64 make_engine(SeedPath s) {
    std::seed_seq seq{static_cast<std::uint32_t>(s.master), static_cast<std::uint32_t>(s.master >> 32),
                      static_cast<std::uint32_t>(s.stream), static_cast<std::uint32_t>(s.stream >> 32),
                      0x5348u};
    return std::mt19937_64(seq);
}

}  // namespace shl
