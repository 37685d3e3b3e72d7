#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "wbplab/gf2codes.hpp"
#include "wbplab/rng.hpp"

namespace wbplab {

// BPSK over AWGN: y_v = (-1)^{x_v} + z_v with z_v ~ N(0, (2 R rho)^{-1}).
struct ChannelConfig {
    double rate = 0.5;
    double snr_db = 3.0;

    double snr_linear() const;
    double noise_variance() const;
    void validate() const;
};

std::vector<double> transmit(std::span<const std::uint8_t> x,
                             const ChannelConfig& cfg, RngStream& rng);

struct StopRule {
    std::uint64_t min_bit_errors = 100;
    std::uint64_t max_frames = 10'000'000;
};

struct BerEstimate {
    std::uint64_t bit_errors = 0;
    std::uint64_t bits = 0;
    std::uint64_t frames = 0;
    std::uint64_t frame_errors = 0;
    double ber = 0.0;
    double ci_low = 0.0;   // 95% normal approximation
    double ci_high = 0.0;
};

BerEstimate finalize_estimate(std::uint64_t bit_errors, std::uint64_t bits,
                              std::uint64_t frames, std::uint64_t frame_errors);

// Hard decoder under test: fills `out` (length N) from channel LLRs. The
// worker index selects per-worker scratch state; the frame index keys any
// per-frame randomness (RRD permutations) so results do not depend on which
// worker handles which frame.
using DecodeFn = std::function<void(const std::vector<double>& llr,
                                    std::vector<std::uint8_t>& out,
                                    unsigned worker, std::uint64_t frame)>;

// Monte Carlo BER of a decoder closure. Frames are keyed by index on the
// noise stream, worked in fixed-size rounds, and counted with integer
// merges, so the result is byte-identical for any worker count. All-zero
// transmission by default; `random_codewords` encodes a random message per
// frame instead. A decoder exception marks the frame fully erroneous.
BerEstimate estimate_ber(const DecodeFn& decode_fn, const Code& code,
                         const ChannelConfig& cfg, const StopRule& stop,
                         std::uint64_t noise_seed, unsigned workers = 1,
                         bool random_codewords = false);

// Equidistant SNR grid in dB, inclusive of both ends.
std::vector<double> snr_grid_db(double lo_db, double hi_db, std::size_t points);

struct Sample {
    std::vector<std::uint8_t> x;
    std::vector<double> y;
    double snr_db = 0.0;
};

// One training mini-batch: per_point all-zero transmissions at each grid
// SNR. Frames are keyed by (batch_index, position) so batches never reuse
// noise.
std::vector<Sample> training_batch(std::span<const double> grid_db,
                                   std::size_t per_point, std::size_t n,
                                   double rate, std::uint64_t noise_seed,
                                   std::uint64_t batch_index);

// Stream ids partitioning the RNG key space.
inline constexpr std::uint64_t kStreamNoise = 1;
inline constexpr std::uint64_t kStreamPermutation = 2;
inline constexpr std::uint64_t kStreamInit = 3;
inline constexpr std::uint64_t kStreamMessage = 4;
inline constexpr std::uint64_t kStreamTrainNoise = 5;

}  // namespace wbplab
