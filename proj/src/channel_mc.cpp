#include "wbplab/channel_mc.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <thread>

#include "wbplab/errors.hpp"
#include "wbplab/wbp.hpp"

namespace wbplab {

double ChannelConfig::snr_linear() const { return std::pow(10.0, snr_db / 10.0); }

double ChannelConfig::noise_variance() const {
    return 1.0 / (2.0 * rate * snr_linear());
}

void ChannelConfig::validate() const {
    if (!(rate > 0.0 && rate <= 1.0)) throw ParamError("rate must be in (0,1]");
    if (!std::isfinite(snr_db)) throw ParamError("SNR must be finite");
}

std::vector<double> transmit(std::span<const std::uint8_t> x,
                             const ChannelConfig& cfg, RngStream& rng) {
    cfg.validate();
    const double sigma = std::sqrt(cfg.noise_variance());
    std::vector<double> y(x.size());
    for (std::size_t v = 0; v < x.size(); ++v)
        y[v] = (x[v] ? -1.0 : 1.0) + sigma * rng.next_gaussian();
    return y;
}

BerEstimate finalize_estimate(std::uint64_t bit_errors, std::uint64_t bits,
                              std::uint64_t frames,
                              std::uint64_t frame_errors) {
    BerEstimate est;
    est.bit_errors = bit_errors;
    est.bits = bits;
    est.frames = frames;
    est.frame_errors = frame_errors;
    if (bits > 0) {
        const double p = static_cast<double>(bit_errors) / static_cast<double>(bits);
        const double half =
            1.96 * std::sqrt(p * (1.0 - p) / static_cast<double>(bits));
        est.ber = p;
        est.ci_low = std::max(0.0, p - half);
        est.ci_high = std::min(1.0, p + half);
    }
    return est;
}

namespace {

struct FrameCounts {
    std::uint64_t bit_errors = 0;
    std::uint64_t frame_errors = 0;
    std::uint64_t decode_failures = 0;
};

// Simulate one frame keyed purely by its index.
FrameCounts run_frame(const DecodeFn& decode_fn, const Code& code,
                      const ChannelConfig& cfg, std::uint64_t noise_seed,
                      std::uint64_t frame, unsigned worker,
                      bool random_codewords, std::vector<std::uint8_t>& x,
                      std::vector<std::uint8_t>& out) {
    if (random_codewords) {
        RngStream msg_rng = RngStream::keyed(noise_seed, kStreamMessage, frame);
        std::vector<std::uint8_t> message(code.k);
        for (auto& b : message) b = msg_rng.next_u64() & 1;
        x = encode(code, message);
    } else {
        x.assign(code.n, 0);
    }
    RngStream rng = RngStream::keyed(noise_seed, kStreamNoise, frame);
    const std::vector<double> y = transmit(x, cfg, rng);
    const std::vector<double> llr = channel_llr(y, cfg.rate, cfg.snr_linear());

    FrameCounts counts;
    try {
        decode_fn(llr, out, worker, frame);
        std::uint64_t errs = 0;
        for (std::size_t v = 0; v < x.size(); ++v) errs += (out[v] ^ x[v]) & 1;
        counts.bit_errors = errs;
        counts.frame_errors = errs > 0 ? 1 : 0;
    } catch (const Error&) {
        counts.bit_errors = code.n;  // count the whole frame as errored
        counts.frame_errors = 1;
        counts.decode_failures = 1;
    }
    return counts;
}

}  // namespace

BerEstimate estimate_ber(const DecodeFn& decode_fn, const Code& code,
                         const ChannelConfig& cfg, const StopRule& stop,
                         std::uint64_t noise_seed, unsigned workers,
                         bool random_codewords) {
    cfg.validate();
    if (workers == 0) workers = 1;

    constexpr std::uint64_t kRound = 1024;  // stop rule checked per round
    std::uint64_t bit_errors = 0, frames = 0, frame_errors = 0, failures = 0;

    while (frames < stop.max_frames && bit_errors < stop.min_bit_errors) {
        const std::uint64_t round =
            std::min<std::uint64_t>(kRound, stop.max_frames - frames);
        const std::uint64_t base = frames;

        std::vector<FrameCounts> partial(workers);
        std::atomic<std::uint64_t> next{0};
        auto work = [&](unsigned wid) {
            std::vector<std::uint8_t> x, out;
            FrameCounts acc;
            std::uint64_t i;
            while ((i = next.fetch_add(1)) < round) {
                const FrameCounts c =
                    run_frame(decode_fn, code, cfg, noise_seed, base + i, wid,
                              random_codewords, x, out);
                acc.bit_errors += c.bit_errors;
                acc.frame_errors += c.frame_errors;
                acc.decode_failures += c.decode_failures;
            }
            partial[wid] = acc;
        };
        if (workers == 1) {
            work(0);
        } else {
            std::vector<std::thread> pool;
            for (unsigned wid = 0; wid < workers; ++wid)
                pool.emplace_back(work, wid);
            for (auto& th : pool) th.join();
        }
        // Integer counts: the merged totals do not depend on which worker
        // handled which frame.
        for (const FrameCounts& c : partial) {
            bit_errors += c.bit_errors;
            frame_errors += c.frame_errors;
            failures += c.decode_failures;
        }
        frames += round;
    }
    if (failures > 0)
        std::fprintf(stderr, "estimate_ber: %llu decoder failures counted as errors\n",
                     static_cast<unsigned long long>(failures));
    return finalize_estimate(bit_errors, code.n * frames, frames, frame_errors);
}

std::vector<double> snr_grid_db(double lo_db, double hi_db, std::size_t points) {
    if (points == 0) throw ParamError("SNR grid must be nonempty");
    std::vector<double> grid(points);
    if (points == 1) {
        grid[0] = lo_db;
        return grid;
    }
    const double step = (hi_db - lo_db) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo_db + step * static_cast<double>(i);
    return grid;
}

std::vector<Sample> training_batch(std::span<const double> grid_db,
                                   std::size_t per_point, std::size_t n,
                                   double rate, std::uint64_t noise_seed,
                                   std::uint64_t batch_index) {
    if (grid_db.empty()) throw ParamError("SNR grid must be nonempty");
    std::vector<Sample> batch;
    batch.reserve(grid_db.size() * per_point);
    const std::vector<std::uint8_t> zero(n, 0);
    std::uint64_t position = 0;
    for (const double snr_db : grid_db) {
        ChannelConfig cfg{rate, snr_db};
        for (std::size_t i = 0; i < per_point; ++i, ++position) {
            RngStream rng = RngStream::keyed(
                noise_seed, kStreamTrainNoise,
                (batch_index << 20) + position);  // frames never reused
            Sample s;
            s.x = zero;
            s.y = transmit(zero, cfg, rng);
            s.snr_db = snr_db;
            batch.push_back(std::move(s));
        }
    }
    return batch;
}

}  // namespace wbplab
