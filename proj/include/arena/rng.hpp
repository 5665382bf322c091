#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string_view>

namespace arena {

// FNV-1a 64-bit, used for substream tags and scenario hashing.
inline std::uint64_t fnv1a(std::string_view bytes,
                           std::uint64_t basis = 0xcbf29ce484222325ULL) {
    std::uint64_t h = basis;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t fnv1a_u64(std::uint64_t value, std::uint64_t basis) {
    std::uint64_t h = basis;
    for (int i = 0; i < 8; ++i) {
        h ^= (value >> (8 * i)) & 0xffU;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// splitmix64 finaliser; spreads low-entropy seeds before feeding mt19937_64.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// Deterministic uniform source. Distribution helpers are hand-rolled so
// output is identical across standard library implementations.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(mix64(seed)) {}

    std::uint64_t next_u64() { return eng_(); }

    // [0, 1), 53-bit resolution
    double uniform01() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    // [lo, hi)
    double uniform(double lo, double hi) {
        if (!(lo <= hi)) throw std::invalid_argument("uniform: lo > hi");
        return lo + (hi - lo) * uniform01();
    }

    // unbiased [0, n)
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("below: n == 0");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = eng_();
        } while (x >= limit);
        return x % n;
    }

  private:
    std::mt19937_64 eng_;
};

// Named substream: same master seed + same tag -> same stream, independent
// tags -> effectively independent streams.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view tag) {
    return fnv1a(tag, fnv1a_u64(master, 0xcbf29ce484222325ULL));
}

inline Rng substream(std::uint64_t master, std::string_view tag) {
    return Rng(substream_seed(master, tag));
}

}  // namespace arena
