#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace scope {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

/// Mixes a base seed with a stream tag and an index so that every stochastic
/// consumer in the pipeline draws from its own reproducible stream.
inline uint64_t derive_seed(uint64_t base, uint64_t stream, uint64_t index = 0) {
    return splitmix64(splitmix64(base ^ (stream * 0x9e3779b97f4a7c15ull)) + index);
}

// mt19937_64 with hand-rolled distributions. The engine's output sequence is
// pinned by the standard; std::*_distribution is not, so we roll our own to
// keep artifacts byte-identical across toolchains.
class Rng {
  public:
    explicit Rng(uint64_t seed) : eng_(seed) {}

    uint64_t next_u64() { return eng_(); }

    /// Uniform double in [0, 1) with 53 bits of precision.
    double next_double() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    /// Unbiased integer in [0, n).
    int next_int(int n) {
        const uint64_t bound = static_cast<uint64_t>(n);
        const uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        uint64_t v = eng_();
        while (v >= limit) v = eng_();
        return static_cast<int>(v % bound);
    }

    /// Standard normal via Box-Muller.
    double next_normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        while (u1 <= 0.0) u1 = next_double();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

  private:
    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace scope
