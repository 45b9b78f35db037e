#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace nglat {

using Rng = std::mt19937_64;

/// Independent stream for (seed, stream index). Results depend only on the
/// pair, never on which thread consumes the stream.
inline Rng make_stream(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x6e676c61u};
    return Rng(seq);
}

inline double uniform01(Rng& rng) {
    // 53 random bits, never exactly 0.
    return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline double exponential(Rng& rng, double rate) { return -std::log(uniform01(rng)) / rate; }

inline int uniform_index(Rng& rng, int count) { return static_cast<int>(uniform01(rng) * count); }

}  // namespace nglat
