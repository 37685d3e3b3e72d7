#pragma once

#include <cmath>
#include <cstdint>

namespace wbplab {

// SplitMix64 finalizer. Used as the mixing stage of the counter generator.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Counter-based splittable generator. A stream is addressed by
// (seed, stream id, frame index); draws within a stream are counted.
// Identical addressing gives identical draws regardless of how work is
// split across workers, which is what makes Monte Carlo runs reproducible
// under any worker count.
class RngStream {
  public:
    RngStream() = default;

    static RngStream keyed(std::uint64_t seed, std::uint64_t stream,
                           std::uint64_t frame = 0) {
        RngStream r;
        r.key_ = mix64(mix64(mix64(seed) ^ (0xa076'1d64'78bd'642full * stream)) ^
                       (0xe703'7ed1'a0b4'28dbull * frame));
        return r;
    }

    // Child stream with an independent key.
    RngStream split(std::uint64_t index) const {
        RngStream r;
        r.key_ = mix64(key_ ^ (0x8ebc'6af0'9c88'c6e3ull * (index + 1)));
        return r;
    }

    std::uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ull * ++ctr_); }

    // Uniform in [0,1), 53-bit resolution.
    double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Unbiased uniform integer in [0, n).
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Standard normal via the Box-Muller pair transform; consumes two draws.
    double next_gaussian() {
        const double u1 = 1.0 - next_unit();  // (0,1], keeps the log finite
        const double u2 = next_unit();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

  private:
    std::uint64_t key_ = 0;
    std::uint64_t ctr_ = 0;
};

}  // namespace wbplab
