#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "wbplab/channel_mc.hpp"
#include "wbplab/losses.hpp"
#include "wbplab/rrd.hpp"
#include "wbplab/wbp.hpp"

namespace wbplab {

inline constexpr double kWeightMax = 10.0;
inline constexpr std::size_t kPanHidden = 20;

// Shallow 1 -> 20 -> 1 network mapping normalized SNR to one decoder
// parameter: rectifier hidden layer, sigmoid output scaled into the
// parameter's domain.
struct PanNet {
    std::vector<double> w1, b1, w2;  // kPanHidden each
    double b2 = 0.0;
    double out_scale = 1.0;

    std::size_t param_count() const { return 3 * kPanHidden + 1; }
};

// Affine map of the training SNR interval onto [-1, 1].
double pan_input_norm(double snr_db, double lo_db = 1.0, double hi_db = 8.0);

double pan_forward(const PanNet& net, double x);
PanNet pan_init(double out_scale, RngStream& rng);

// Which decoder parameters are optimized; the rest stay frozen at their
// current values.
struct TrainableSelection {
    bool edge_weights = true;
    bool chan_weights = true;
    bool gamma = false;
    bool beta = false;
};

enum class ParamKind { EdgeWeight, ChanWeight, Gamma, Beta };

struct ParamRef {
    ParamKind kind;
    std::size_t slot = 0;  // index into edge_w / chan_w storage
};

// Flat view of the trainable parameters: refs into the model plus box
// domains and names for diagnostics.
struct ParamLayout {
    std::vector<ParamRef> refs;
    std::vector<double> lo, hi;
    std::vector<std::string> names;

    std::size_t size() const { return refs.size(); }
};

// Everything that defines one trainable decoder: graph, weight model,
// damping/clipping, optional RRD cascade, the trainable subset, and the
// optional parameter adapter networks (one per trainable scalar).
struct DecoderSetup {
    const TannerGraph* graph = nullptr;
    double rate = 0.5;
    WeightModel weights;
    DecoderConfig cfg;
    bool use_rrd = false;
    RrdConfig rrd;
    AutSampler sampler;
    TrainableSelection sel;
    bool pan_enabled = false;
    std::vector<PanNet> pan;  // aligned with layout().refs

    ParamLayout layout() const;
    // Flat trainable vector: direct parameter values, or the concatenated
    // PAN network parameters when PAN is enabled.
    std::vector<double> params() const;
    void set_params(std::span<const double> theta);
    std::vector<double> param_lo() const;
    std::vector<double> param_hi() const;

    void init_pan(RngStream& rng);
    // Direct parameter values adapted to one SNR (PAN output, or the stored
    // values when PAN is disabled), in layout order.
    std::vector<double> adapted_values(double snr_db) const;
    std::size_t total_iterations() const {
        return use_rrd ? rrd.total_iterations() : cfg.iterations;
    }
};

// Recorded forward pass of one decode (one entry per RRD stage; a single
// stage for plain WBP) with everything the reverse sweep needs.
struct StageTape {
    std::size_t t_offset = 0;
    std::vector<double> ell;  // stage input, stage frame
    std::vector<std::vector<double>> lam_pre, lam_preclip, lam;
    std::vector<std::vector<double>> lam_hat_pre, lam_hat;
    std::vector<std::vector<double>> marginals;  // stage frame
};

struct DecodeTape {
    std::vector<StageTape> stages;
    std::vector<Permutation> perms;       // pi_tau per stage (RRD only)
    std::vector<Permutation> cumulative;  // Pi_tau per stage (RRD only)
    std::vector<double> ell;              // transmission order
    // Transmission-order outputs for all T iterations:
    std::vector<std::vector<double>> marginals;
    std::vector<std::vector<double>> soft;
};

DecodeTape record_decode(const DecoderSetup& setup, const WeightModel& weights,
                         double gamma, double beta, std::span<const double> ell,
                         RngStream perm_rng);

// Adjoints of every decoder parameter after one reverse sweep.
struct GradAccum {
    std::vector<double> edge_w, chan_w;
    double gamma = 0.0;
    double beta = 0.0;
    std::vector<double> ell;  // transmission order
};

// Reverse-mode sweep seeded with dL/dm for every recorded iteration
// (transmission order). Clip and the cross-entropy clamp differentiate as
// identity inside their active range and zero on the flats.
GradAccum backward(const DecoderSetup& setup, const WeightModel& weights,
                   double gamma, double beta, const DecodeTape& tape,
                   const std::vector<std::vector<double>>& dm);

struct SampleResult {
    double loss = 0.0;
    std::vector<double> grad;  // empty unless gradients requested
};

// Multi-loss of one (x, y, rho) observation, optionally with the gradient
// with respect to the flat trainable vector.
SampleResult sample_loss(const DecoderSetup& setup, const Sample& sample,
                         LossKind kind, double eta, std::uint64_t perm_seed,
                         std::uint64_t frame_id, bool want_grad,
                         DecoderWorkspace* ws = nullptr);

struct BatchResult {
    double loss = 0.0;
    std::vector<double> grad;
};

// Mean loss (and gradient) over a batch; per-sample results are reduced in
// sample order regardless of worker count.
BatchResult batch_loss_grad(const DecoderSetup& setup,
                            const std::vector<Sample>& batch, LossKind kind,
                            double eta, std::uint64_t perm_seed,
                            std::uint64_t frame_base, bool want_grad,
                            unsigned workers = 1);

double batch_loss(const DecoderSetup& setup, const std::vector<Sample>& batch,
                  LossKind kind, double eta, std::uint64_t perm_seed,
                  std::uint64_t frame_base, unsigned workers = 1);

// RMSprop with box projection onto the parameter domains.
struct OptimizerState {
    std::vector<double> s;
    double decay = 0.99;
    double eps = 1e-8;
};

// Scales g to the threshold when its L2 norm exceeds it; returns the norm.
double global_norm_clip(std::span<double> g, double threshold);

void rmsprop_step(OptimizerState& state, std::span<double> theta,
                  std::span<const double> lo, std::span<const double> hi,
                  std::span<const double> g, double alpha);

struct TrainConfig {
    std::uint64_t steps = 0;
    std::size_t batch_per_point = 10;
    double snr_lo_db = 1.0;
    double snr_hi_db = 8.0;
    std::size_t snr_points = 10;
    LossKind loss = LossKind::SoftBer;
    double alpha0 = 1e-3;
    double alpha_decay = 0.8;
    double eta0 = 1.0;
    double eta_decay = 0.5;
    std::uint64_t decay_interval = 5000;
    double grad_clip = 0.1;
    double rms_decay = 0.99;
    double rms_eps = 1e-8;
    std::uint64_t seed = 1;
};

struct SchedulePoint {
    double alpha;
    double eta;
};

// alpha = alpha0 * alpha_decay^(step / interval), eta likewise.
SchedulePoint schedule_tick(const TrainConfig& cfg, std::uint64_t step);

struct TrainLogRow {
    std::uint64_t step = 0;
    double alpha = 0.0, eta = 0.0, loss = 0.0;
    std::vector<double> snapshot;  // scalar-model parameter values
};

struct TrainResult {
    std::vector<TrainLogRow> log;
    OptimizerState opt;
};

// Mini-batch loop: sample batch, forward/backward, global-norm clip,
// RMSprop step, schedule tick. Writes one CSV row per step when a stream
// is given.
TrainResult train(DecoderSetup& setup, const TrainConfig& cfg,
                  unsigned workers = 1, std::ostream* log_csv = nullptr);

std::vector<double> snapshot_values(const DecoderSetup& setup);
std::vector<std::string> snapshot_names(const DecoderSetup& setup);

// Checkpoint document: weight model + decoder config + RRD + PAN +
// optimizer state, tied to the parity-check matrix hash.
void checkpoint_to_doc(KvDoc& doc, const DecoderSetup& setup,
                       std::uint64_t matrix_hash, const OptimizerState* opt);
void checkpoint_from_doc(const KvDoc& doc, DecoderSetup& setup,
                         std::uint64_t matrix_hash);

}  // namespace wbplab
