#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "wbplab/channel_mc.hpp"
#include "wbplab/gf2codes.hpp"
#include "wbplab/kvconfig.hpp"
#include "wbplab/osd.hpp"
#include "wbplab/tanner.hpp"
#include "wbplab/traingrad.hpp"

namespace wbplab {

// A code plus the selected parity-check matrix and its Tanner graph,
// resolved from the [code] section of an experiment config.
struct LoadedCode {
    Code code;
    std::string label;        // e.g. "rm(32,16)" or the alist stem
    std::string matrix_name;  // "std", "oc", or the alist matrix label
    TannerGraph graph;
    std::uint64_t h_hash = 0;
    bool is_rm = false;
    unsigned rm_m = 0;

    const BitMatrix& h() const { return code.pcm(matrix_name); }
};

LoadedCode load_code(const KvDoc& cfg);

// Decoder setup from [decoder] (+ trainable list in [train]); weights start
// at 1 and gamma/beta at their configured values.
DecoderSetup make_setup(const KvDoc& cfg, const LoadedCode& lc);

TrainConfig make_train_config(const KvDoc& cfg);

// Hard-decision closure for the configured decoder (used by evaluate).
DecodeFn make_decode_fn(const DecoderSetup& setup, std::uint64_t perm_seed,
                        unsigned workers);

struct EvalRow {
    std::string decoder;
    double snr_db = 0.0;
    BerEstimate est;
};

std::vector<EvalRow> evaluate_run(const DecoderSetup& setup,
                                  const LoadedCode& lc, const KvDoc& cfg,
                                  unsigned workers);

struct SweepPoint {
    double value = 0.0;
    double ce = 0.0, nss = 0.0, soft_ber = 0.0;
    double ber = 0.0;
    double ber_se = 0.0;  // standard error of the frame-mean BER
};

// Loss landscape over one scalar parameter on a frozen sample set: each
// grid value decodes the same frames; losses are final-iteration values.
std::vector<SweepPoint> sweep_loss_run(DecoderSetup setup, const LoadedCode& lc,
                                       const std::string& param, double lo,
                                       double hi, std::size_t points,
                                       double snr_db, std::uint64_t frames,
                                       std::uint64_t seed, unsigned workers);

// CSV writing with the resolved config and matrix hash embedded as comment
// lines; identical inputs produce byte-identical files.
void write_eval_csv(std::ostream& out, const KvDoc& cfg,
                    const LoadedCode& lc, const std::vector<EvalRow>& rows,
                    std::uint64_t seed);
void write_sweep_csv(std::ostream& out, const KvDoc& cfg, const LoadedCode& lc,
                     const std::string& param,
                     const std::vector<SweepPoint>& points);

// Full command-line entry point (subcommands build-matrix, train, evaluate,
// sweep-loss). Returns the process exit code.
int run_cli(const std::vector<std::string>& args);

}  // namespace wbplab
