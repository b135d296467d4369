#pragma once

#include <cstdint>

namespace mpcsim {

constexpr std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

constexpr std::uint64_t mix(std::uint64_t a) { return splitmix64(a); }

template <class... Rest>
constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b, Rest... rest) {
    return mix(splitmix64(a) ^ (b + 0x632be59bd9b4e019ULL + (a << 6) + (a >> 2)), rest...);
}

// Maps a 64-bit hash onto [0, bound) without modulo bias worth caring about.
constexpr std::uint64_t reduce_range(std::uint64_t h, std::uint64_t bound) {
    return static_cast<std::uint64_t>((static_cast<unsigned __int128>(h) * bound) >> 64);
}

// Counter-based stream; identical sequences for identical seeds on every platform.
class Stream {
  public:
    explicit constexpr Stream(std::uint64_t seed) : seed_(seed) {}

    constexpr std::uint64_t next() { return mix(seed_, counter_++); }

    // Uniform integer in [0, bound).
    constexpr std::uint64_t below(std::uint64_t bound) {
        if (bound <= 1) return 0;
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % bound);
        for (;;) {
            std::uint64_t x = next();
            if (x < limit) return x % bound;
        }
    }

    constexpr double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  private:
    std::uint64_t seed_;
    std::uint64_t counter_ = 0;
};

}  // namespace mpcsim
