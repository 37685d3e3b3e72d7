#include "wbplab/wbp.hpp"

#include <algorithm>
#include <cmath>

#include "wbplab/errors.hpp"

namespace wbplab {

std::string variant_tag(WeightVariant v) {
    switch (v) {
        case WeightVariant::FW: return "fw";
        case WeightVariant::RnnFW: return "rnn-fw";
        case WeightVariant::SS: return "ss";
        case WeightVariant::RnnSS: return "rnn-ss";
    }
    return "rnn-ss";
}

WeightVariant variant_from_tag(const std::string& tag) {
    if (tag == "fw") return WeightVariant::FW;
    if (tag == "rnn-fw") return WeightVariant::RnnFW;
    if (tag == "ss") return WeightVariant::SS;
    if (tag == "rnn-ss") return WeightVariant::RnnSS;
    throw ParamError("unknown weight model '" + tag + "'");
}

WeightModel WeightModel::ones(WeightVariant variant, std::size_t iterations,
                              std::size_t n_edges, std::size_t n_vars) {
    WeightModel w;
    w.variant = variant;
    w.iterations = iterations;
    w.n_edges = n_edges;
    w.n_vars = n_vars;
    switch (variant) {
        case WeightVariant::FW:
            w.edge_w.assign(iterations * n_edges, 1.0);
            w.chan_w.assign(iterations * n_vars, 1.0);
            break;
        case WeightVariant::RnnFW:
            w.edge_w.assign(n_edges, 1.0);
            w.chan_w.assign(n_vars, 1.0);
            break;
        case WeightVariant::SS:
            w.edge_w.assign(iterations, 1.0);
            w.chan_w.assign(iterations, 1.0);
            break;
        case WeightVariant::RnnSS:
            w.edge_w.assign(1, 1.0);
            w.chan_w.assign(1, 1.0);
            break;
    }
    return w;
}

void WeightModel::validate(const TannerGraph& g) const {
    if (n_edges != g.n_edges() || n_vars != g.n_vars)
        throw StructuralError("weight model shape does not match graph");
    const WeightModel expect = ones(variant, iterations, n_edges, n_vars);
    if (edge_w.size() != expect.edge_w.size() ||
        chan_w.size() != expect.chan_w.size())
        throw StructuralError("weight model storage size is inconsistent");
}

void DecoderConfig::validate() const {
    if (iterations == 0) throw ParamError("iteration count must be positive");
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw ParamError("damping factor must lie in [0,1]");
    if (!(clip_max > 0.0)) throw ParamError("clip bound must be positive");
}

void DecoderWorkspace::resize(const TannerGraph& g) {
    const std::size_t e = g.n_edges();
    lam.assign(e, 0.0);
    lam_hat.assign(e, 0.0);
    lam_pre.assign(e, 0.0);
    lam_hat_pre.assign(e, 0.0);
    tanh_buf.assign(e, 0.0);
    we_buf.assign(e, 0.0);
    wv_buf.assign(g.n_vars, 0.0);
    m.assign(g.n_vars, 0.0);
    o.assign(g.n_vars, 0.0);
}

std::vector<double> channel_llr(std::span<const double> y, double rate,
                                double snr_linear) {
    if (!(snr_linear > 0.0)) throw ParamError("SNR must be positive");
    if (!(rate > 0.0 && rate <= 1.0)) throw ParamError("rate must be in (0,1]");
    std::vector<double> ell(y.size());
    const double scale = 4.0 * rate * snr_linear;
    for (std::size_t v = 0; v < y.size(); ++v) ell[v] = scale * y[v];
    return ell;
}

// Variable degrees up to this bound use plain quadratic exclusion sums,
// which reproduce the left-to-right accumulation of a naive sum-product
// loop term for term. Larger degrees (overcomplete matrices) switch to
// linear prefix/suffix sums, which associate the additions differently.
static constexpr std::size_t kQuadraticDegreeMax = 32;

void vn_update(const TannerGraph& g, std::span<const double> we,
               std::span<const double> wv, std::span<const double> ell,
               std::span<const double> lam_hat_prev, std::span<double> lam_pre) {
    std::vector<double> suffix;  // escapes to heap only for large degrees
    for (std::size_t v = 0; v < g.n_vars; ++v) {
        const auto adj = g.var_edges(v);
        const double base = wv[v] * ell[v];
        if (adj.size() <= kQuadraticDegreeMax) {
            for (std::size_t i = 0; i < adj.size(); ++i) {
                double acc = base;
                for (std::size_t j = 0; j < adj.size(); ++j) {
                    if (j == i) continue;
                    const std::uint32_t e = adj[j];
                    acc += we[e] * lam_hat_prev[e];
                }
                lam_pre[adj[i]] = acc;
            }
        } else {
            suffix.resize(adj.size() + 1);
            suffix[adj.size()] = 0.0;
            for (std::size_t j = adj.size(); j-- > 0;) {
                const std::uint32_t e = adj[j];
                suffix[j] = we[e] * lam_hat_prev[e] + suffix[j + 1];
            }
            double prefix = base;
            for (std::size_t i = 0; i < adj.size(); ++i) {
                const std::uint32_t e = adj[i];
                lam_pre[e] = prefix + suffix[i + 1];
                prefix += we[e] * lam_hat_prev[e];
            }
        }
    }
}

void cn_update(const TannerGraph& g, std::span<const double> lam,
               std::span<double> lam_hat_pre, std::span<double> tanh_scratch) {
    for (std::size_t e = 0; e < lam.size(); ++e)
        tanh_scratch[e] = std::tanh(lam[e] / 2.0);
    for (std::size_t c = 0; c < g.n_checks; ++c) {
        const auto adj = g.check_edges(c);
        for (std::size_t i = 0; i < adj.size(); ++i) {
            double prod = 1.0;
            for (std::size_t j = 0; j < adj.size(); ++j) {
                if (j == i) continue;
                prod *= tanh_scratch[adj[j]];
            }
            const double out = 2.0 * std::atanh(prod);
            if (!std::isfinite(out))
                throw StructuralError(
                    "check update overflow: messages reached the atanh "
                    "singularity (clipping missing or disabled)");
            lam_hat_pre[adj[i]] = out;
        }
    }
}

void damp(std::span<const double> previous, std::span<const double> pre_update,
          double gamma, std::span<double> out) {
    if (!(gamma >= 0.0 && gamma <= 1.0))
        throw ParamError("damping factor must lie in [0,1]");
    const double keep = 1.0 - gamma;
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = gamma * previous[i] + keep * pre_update[i];
}

double clip_lower_bound(double clip_max) {
    return -std::log(std::tanh(clip_max / 2.0));
}

void clip_messages(std::span<double> lam, double clip_max) {
    if (!(clip_max > 0.0)) throw ParamError("clip bound must be positive");
    const double lo = clip_lower_bound(clip_max);
    for (double& x : lam) {
        const double a = std::fabs(x);
        if (a < lo)
            x = std::signbit(x) ? -lo : lo;  // zero gets the positive bound
        else if (a > clip_max)
            x = x < 0 ? -clip_max : clip_max;
    }
}

void marginalize(const TannerGraph& g, std::span<const double> we,
                 std::span<const double> wv, std::span<const double> ell,
                 std::span<const double> lam_hat, std::span<double> m) {
    for (std::size_t v = 0; v < g.n_vars; ++v) {
        double acc = wv[v] * ell[v];
        for (const std::uint32_t e : g.var_edges(v)) acc += we[e] * lam_hat[e];
        m[v] = acc;
    }
}

std::vector<std::uint8_t> hard_decision(std::span<const double> m) {
    std::vector<std::uint8_t> out(m.size());
    for (std::size_t v = 0; v < m.size(); ++v) out[v] = m[v] < 0.0 ? 1 : 0;
    return out;
}

IterationWeights weights_at(const WeightModel& w, std::size_t t,
                            DecoderWorkspace& ws) {
    switch (w.variant) {
        case WeightVariant::FW:
            return {w.edge_w.data() + t * w.n_edges, w.chan_w.data() + t * w.n_vars};
        case WeightVariant::RnnFW:
            return {w.edge_w.data(), w.chan_w.data()};
        case WeightVariant::SS:
        case WeightVariant::RnnSS: {
            const std::size_t slot = w.variant == WeightVariant::SS ? t : 0;
            std::fill(ws.we_buf.begin(), ws.we_buf.end(), w.edge_w[slot]);
            std::fill(ws.wv_buf.begin(), ws.wv_buf.end(), w.chan_w[slot]);
            return {ws.we_buf.data(), ws.wv_buf.data()};
        }
    }
    return {nullptr, nullptr};
}

DecoderTrace decode(const TannerGraph& g, const WeightModel& weights,
                    const DecoderConfig& cfg, std::span<const double> ell,
                    const DecodeOptions& options, DecoderWorkspace* ws) {
    cfg.validate();
    weights.validate(g);
    if (ell.size() != g.n_vars)
        throw ParamError("channel LLR length does not match graph");
    if (weights.iterations < options.iteration_offset + cfg.iterations)
        throw StructuralError("weight model covers fewer iterations than config");

    DecoderWorkspace local;
    DecoderWorkspace& w = ws ? *ws : local;
    w.resize(g);

    const std::size_t n_e = g.n_edges();
    const std::size_t n_v = g.n_vars;
    DecoderTrace trace;

    for (std::size_t t = 0; t < cfg.iterations; ++t) {
        const IterationWeights iw =
            weights_at(weights, options.iteration_offset + t, w);
        const std::span<const double> we{iw.edge, n_e};
        const std::span<const double> wv{iw.chan, n_v};

        vn_update(g, we, wv, ell, w.lam_hat, w.lam_pre);
        damp(w.lam, w.lam_pre, cfg.gamma, w.lam);
        if (cfg.clipping_enabled()) clip_messages(w.lam, cfg.clip_max);
        cn_update(g, w.lam, w.lam_hat_pre, w.tanh_buf);
        damp(w.lam_hat, w.lam_hat_pre, cfg.gamma, w.lam_hat);
        marginalize(g, we, wv, ell, w.lam_hat, w.m);
        for (std::size_t v = 0; v < n_v; ++v) {
            if (!std::isfinite(w.m[v]))
                throw NumericError("non-finite marginal", t + 1);
            w.o[v] = 1.0 - 1.0 / (1.0 + std::exp(-w.m[v]));
        }

        const bool keep = options.record_marginals || t + 1 == cfg.iterations;
        if (keep) {
            trace.marginals.emplace_back(w.m.begin(), w.m.end());
            trace.soft.emplace_back(w.o.begin(), w.o.end());
        }
        if (options.record_messages) {
            trace.lam.emplace_back(w.lam.begin(), w.lam.end());
            trace.lam_hat.emplace_back(w.lam_hat.begin(), w.lam_hat.end());
        }
    }
    trace.hard = hard_decision(trace.marginals.back());
    return trace;
}

void weights_to_doc(KvDoc& doc, const WeightModel& w, const DecoderConfig& cfg,
                    std::uint64_t h_hash) {
    doc.set("decoder", "model", variant_tag(w.variant));
    doc.set_int("decoder", "t", static_cast<std::int64_t>(w.iterations));
    doc.set_double("decoder", "gamma", cfg.gamma);
    doc.set_double("decoder", "clip_max", cfg.clip_max);
    doc.set_int("decoder", "n_edges", static_cast<std::int64_t>(w.n_edges));
    doc.set_int("decoder", "n_vars", static_cast<std::int64_t>(w.n_vars));
    doc.set("decoder", "matrix_hash", std::to_string(h_hash));
    doc.set_doubles("weights", "edge", w.edge_w);
    doc.set_doubles("weights", "channel", w.chan_w);
}

void weights_from_doc(const KvDoc& doc, WeightModel& w, DecoderConfig& cfg,
                      std::uint64_t expected_h_hash) {
    const std::uint64_t stored =
        std::stoull(doc.require("decoder", "matrix_hash"));
    if (stored != expected_h_hash)
        throw StructuralError(
            "checkpoint was written for a different parity-check matrix");
    w.variant = variant_from_tag(doc.require("decoder", "model"));
    w.iterations = static_cast<std::size_t>(doc.get_int("decoder", "t"));
    w.n_edges = static_cast<std::size_t>(doc.get_int("decoder", "n_edges"));
    w.n_vars = static_cast<std::size_t>(doc.get_int("decoder", "n_vars"));
    w.edge_w = doc.get_doubles("weights", "edge");
    w.chan_w = doc.get_doubles("weights", "channel");
    cfg.iterations = w.iterations;
    cfg.gamma = doc.get_double("decoder", "gamma");
    cfg.clip_max = doc.get_double("decoder", "clip_max");
    const WeightModel expect =
        WeightModel::ones(w.variant, w.iterations, w.n_edges, w.n_vars);
    if (w.edge_w.size() != expect.edge_w.size() ||
        w.chan_w.size() != expect.chan_w.size())
        throw StructuralError("checkpoint weight arrays have wrong sizes");
}

}  // namespace wbplab
