#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "wbplab/kvconfig.hpp"
#include "wbplab/tanner.hpp"

namespace wbplab {

// Weight-sharing variants. FW carries one weight per edge and iteration;
// RNN-FW shares across iterations; SS shares across edges (one message and
// one channel weight per iteration); RNN-SS shares across both (two scalars).
enum class WeightVariant { FW, RnnFW, SS, RnnSS };

std::string variant_tag(WeightVariant v);
WeightVariant variant_from_tag(const std::string& tag);

struct WeightModel {
    WeightVariant variant = WeightVariant::RnnSS;
    std::size_t iterations = 0;  // T
    std::size_t n_edges = 0;
    std::size_t n_vars = 0;
    std::vector<double> edge_w;  // FW: T*|E|, RNN-FW: |E|, SS: T, RNN-SS: 1
    std::vector<double> chan_w;  // FW: T*N,   RNN-FW: N,   SS: T, RNN-SS: 1

    static WeightModel ones(WeightVariant variant, std::size_t iterations,
                            std::size_t n_edges, std::size_t n_vars);

    std::size_t param_count() const { return edge_w.size() + chan_w.size(); }

    // Index into edge_w for the weight applied to edge e at iteration t
    // (0-based); chan index is relative to chan_w.
    std::size_t edge_slot(std::size_t t, std::size_t e) const {
        switch (variant) {
            case WeightVariant::FW: return t * n_edges + e;
            case WeightVariant::RnnFW: return e;
            case WeightVariant::SS: return t;
            case WeightVariant::RnnSS: return 0;
        }
        return 0;
    }
    std::size_t chan_slot(std::size_t t, std::size_t v) const {
        switch (variant) {
            case WeightVariant::FW: return t * n_vars + v;
            case WeightVariant::RnnFW: return v;
            case WeightVariant::SS: return t;
            case WeightVariant::RnnSS: return 0;
        }
        return 0;
    }
    double edge_weight(std::size_t t, std::size_t e) const {
        return edge_w[edge_slot(t, e)];
    }
    double chan_weight(std::size_t t, std::size_t v) const {
        return chan_w[chan_slot(t, v)];
    }
    bool scalar_per_iteration() const {
        return variant == WeightVariant::SS || variant == WeightVariant::RnnSS;
    }
    void validate(const TannerGraph& g) const;
};

// T iterations, damping factor gamma in [0,1], clip bound L_max. Message
// magnitudes are kept in [-log(tanh(clip_max/2)), clip_max]; clip_max =
// infinity disables clipping.
struct DecoderConfig {
    std::size_t iterations = 5;
    double gamma = 0.0;
    double clip_max = 15.0;

    void validate() const;
    bool clipping_enabled() const {
        return clip_max != std::numeric_limits<double>::infinity();
    }
};

struct DecoderTrace {
    // marginals[i] is m^(t) for the i-th recorded iteration; only the final
    // iteration is kept unless record_marginals is set.
    std::vector<std::vector<double>> marginals;
    std::vector<std::vector<double>> soft;  // o^(t) = 1 - sigmoid(m^(t))
    std::vector<std::uint8_t> hard;         // from the final marginals
    // Filled only in record_messages mode.
    std::vector<std::vector<double>> lam;      // variable-to-check, per t
    std::vector<std::vector<double>> lam_hat;  // check-to-variable, per t
};

struct DecodeOptions {
    bool record_marginals = false;
    bool record_messages = false;
    // Global iteration index of the first iteration; weight lookups use
    // iteration_offset + t. Nonzero inside RRD stages, where weights are
    // indexed consecutively across all stages.
    std::size_t iteration_offset = 0;
};

// Reusable per-worker scratch buffers. Never share one workspace between
// concurrent decodes.
struct DecoderWorkspace {
    std::vector<double> lam, lam_hat, lam_pre, lam_hat_pre, tanh_buf;
    std::vector<double> we_buf, wv_buf, m, o;
    void resize(const TannerGraph& g);
};

// Channel LLRs for BPSK over AWGN: ell_v = 4 * R * rho * y_v.
std::vector<double> channel_llr(std::span<const double> y, double rate,
                                double snr_linear);

// Pre-update variable-to-check messages:
//   lam_pre[e] = wv[var(e)] * ell[var(e)] + sum over the variable's other
//   edges e' of we[e'] * lam_hat_prev[e'].
void vn_update(const TannerGraph& g, std::span<const double> we,
               std::span<const double> wv, std::span<const double> ell,
               std::span<const double> lam_hat_prev, std::span<double> lam_pre);

// Pre-update check-to-variable messages:
//   lam_hat_pre[e] = 2 atanh( prod over the check's other edges e' of
//   tanh(lam[e'] / 2) ).
void cn_update(const TannerGraph& g, std::span<const double> lam,
               std::span<double> lam_hat_pre, std::span<double> tanh_scratch);

// out = gamma * previous + (1 - gamma) * pre_update. out may alias previous.
void damp(std::span<const double> previous, std::span<const double> pre_update,
          double gamma, std::span<double> out);

double clip_lower_bound(double clip_max);

// Magnitudes below -log(tanh(clip_max/2)) are raised to that bound, above
// clip_max lowered to it; sign preserved, exact zero maps to the positive
// lower bound.
void clip_messages(std::span<double> lam, double clip_max);

// Output LLRs: m[v] = wv[v] * ell[v] + sum over all of v's edges e of
// we[e] * lam_hat[e] (full, non-extrinsic sum).
void marginalize(const TannerGraph& g, std::span<const double> we,
                 std::span<const double> wv, std::span<const double> ell,
                 std::span<const double> lam_hat, std::span<double> m);

std::vector<std::uint8_t> hard_decision(std::span<const double> m);

// Full decoding loop from zero-initialized messages: per iteration
// vn_update -> damp -> clip -> cn_update -> damp, then marginalize.
DecoderTrace decode(const TannerGraph& g, const WeightModel& weights,
                    const DecoderConfig& cfg, std::span<const double> ell,
                    const DecodeOptions& options = {},
                    DecoderWorkspace* ws = nullptr);

// Resolve the per-iteration weight arrays (broadcasting scalar variants
// into the workspace buffers). Returned pointers stay valid until the
// workspace or model changes.
struct IterationWeights {
    const double* edge;
    const double* chan;
};
IterationWeights weights_at(const WeightModel& w, std::size_t t,
                            DecoderWorkspace& ws);

// Plain-text serialization of a weight model plus decoder config, tagged
// with the parity-check matrix hash so a mismatched graph is detected on
// load.
void weights_to_doc(KvDoc& doc, const WeightModel& w, const DecoderConfig& cfg,
                    std::uint64_t h_hash);
void weights_from_doc(const KvDoc& doc, WeightModel& w, DecoderConfig& cfg,
                      std::uint64_t expected_h_hash);

}  // namespace wbplab
