// SPDX-License-Identifier: Apache-2.0
//
// Per-trial RNG streams derived from (master_seed, stream ids), so trial
// results are reproducible independent of execution order.

#pragma once

#include <cstdint>
#include <random>

namespace cnet {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Independent stream for (seed, a, b, c); same inputs give the same stream.
inline std::mt19937_64 make_stream(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(seed);
    s = splitmix64(s ^ splitmix64(a + 0x1000000001ull));
    s = splitmix64(s ^ splitmix64(b + 0x2000000002ull));
    s = splitmix64(s ^ splitmix64(c + 0x3000000003ull));
    return std::mt19937_64(s);
}

}  // namespace cnet
