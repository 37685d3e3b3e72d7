#include "wbplab/traingrad.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <ostream>
#include <thread>

#include "wbplab/errors.hpp"

namespace wbplab {

double pan_input_norm(double snr_db, double lo_db, double hi_db) {
    return (2.0 * snr_db - (lo_db + hi_db)) / (hi_db - lo_db);
}

double pan_forward(const PanNet& net, double x) {
    double a = net.b2;
    for (std::size_t h = 0; h < kPanHidden; ++h) {
        const double pre = net.w1[h] * x + net.b1[h];
        if (pre > 0.0) a += net.w2[h] * pre;
    }
    return net.out_scale / (1.0 + std::exp(-a));
}

namespace {

// Adjoints of all 3*kPanHidden+1 network parameters, packed [w1, b1, w2, b2].
void pan_backward(const PanNet& net, double x, double dout,
                  std::span<double> grad) {
    double a = net.b2;
    for (std::size_t h = 0; h < kPanHidden; ++h) {
        const double pre = net.w1[h] * x + net.b1[h];
        if (pre > 0.0) a += net.w2[h] * pre;
    }
    const double s = 1.0 / (1.0 + std::exp(-a));
    const double da = dout * net.out_scale * s * (1.0 - s);
    for (std::size_t h = 0; h < kPanHidden; ++h) {
        const double pre = net.w1[h] * x + net.b1[h];
        if (pre > 0.0) {
            grad[2 * kPanHidden + h] = da * pre;        // w2
            const double dpre = da * net.w2[h];
            grad[h] = dpre * x;                          // w1
            grad[kPanHidden + h] = dpre;                 // b1
        } else {
            grad[h] = grad[kPanHidden + h] = grad[2 * kPanHidden + h] = 0.0;
        }
    }
    grad[3 * kPanHidden] = da;  // b2
}

}  // namespace

PanNet pan_init(double out_scale, RngStream& rng) {
    PanNet net;
    net.w1.resize(kPanHidden);
    net.b1.assign(kPanHidden, 0.0);
    net.w2.resize(kPanHidden);
    net.b2 = 0.0;
    net.out_scale = out_scale;
    const double hidden_scale = 1.0;                  // fan-in 1
    const double out_weight_scale = 1.0 / std::sqrt(  // fan-in kPanHidden
        static_cast<double>(kPanHidden));
    for (std::size_t h = 0; h < kPanHidden; ++h)
        net.w1[h] = hidden_scale * (2.0 * rng.next_unit() - 1.0);
    for (std::size_t h = 0; h < kPanHidden; ++h)
        net.w2[h] = out_weight_scale * (2.0 * rng.next_unit() - 1.0);
    return net;
}

ParamLayout DecoderSetup::layout() const {
    ParamLayout l;
    auto add = [&l](ParamKind kind, std::size_t slot, std::string name,
                    double lo, double hi) {
        l.refs.push_back({kind, slot});
        l.lo.push_back(lo);
        l.hi.push_back(hi);
        l.names.push_back(std::move(name));
    };
    const bool per_iter = weights.variant == WeightVariant::FW ||
                          weights.variant == WeightVariant::SS;
    if (sel.edge_weights) {
        for (std::size_t s = 0; s < weights.edge_w.size(); ++s) {
            std::string name;
            switch (weights.variant) {
                case WeightVariant::FW:
                    name = "w_edge[" + std::to_string(s / weights.n_edges) + "," +
                           std::to_string(s % weights.n_edges) + "]";
                    break;
                case WeightVariant::RnnFW:
                    name = "w_edge[" + std::to_string(s) + "]";
                    break;
                case WeightVariant::SS:
                    name = "w_msg[" + std::to_string(s) + "]";
                    break;
                case WeightVariant::RnnSS:
                    name = "w_msg";
                    break;
            }
            add(ParamKind::EdgeWeight, s, std::move(name), 0.0, kWeightMax);
        }
    }
    if (sel.chan_weights) {
        for (std::size_t s = 0; s < weights.chan_w.size(); ++s) {
            std::string name;
            switch (weights.variant) {
                case WeightVariant::FW:
                    name = "w_ch[" + std::to_string(s / weights.n_vars) + "," +
                           std::to_string(s % weights.n_vars) + "]";
                    break;
                case WeightVariant::RnnFW:
                    name = "w_ch[" + std::to_string(s) + "]";
                    break;
                case WeightVariant::SS:
                    name = "w_ch[" + std::to_string(s) + "]";
                    break;
                case WeightVariant::RnnSS:
                    name = "w_ch";
                    break;
            }
            add(ParamKind::ChanWeight, s, std::move(name), 0.0, kWeightMax);
        }
    }
    (void)per_iter;
    if (sel.gamma) add(ParamKind::Gamma, 0, "gamma", 0.0, 1.0);
    if (use_rrd && sel.beta) add(ParamKind::Beta, 0, "beta", 0.0, 1.0);
    return l;
}

std::vector<double> DecoderSetup::params() const {
    const ParamLayout l = layout();
    if (pan_enabled) {
        std::vector<double> theta;
        theta.reserve(pan.size() * (3 * kPanHidden + 1));
        for (const PanNet& net : pan) {
            theta.insert(theta.end(), net.w1.begin(), net.w1.end());
            theta.insert(theta.end(), net.b1.begin(), net.b1.end());
            theta.insert(theta.end(), net.w2.begin(), net.w2.end());
            theta.push_back(net.b2);
        }
        return theta;
    }
    std::vector<double> theta(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
        switch (l.refs[i].kind) {
            case ParamKind::EdgeWeight: theta[i] = weights.edge_w[l.refs[i].slot]; break;
            case ParamKind::ChanWeight: theta[i] = weights.chan_w[l.refs[i].slot]; break;
            case ParamKind::Gamma: theta[i] = cfg.gamma; break;
            case ParamKind::Beta: theta[i] = rrd.beta; break;
        }
    }
    return theta;
}

void DecoderSetup::set_params(std::span<const double> theta) {
    if (pan_enabled) {
        const std::size_t per = 3 * kPanHidden + 1;
        if (theta.size() != pan.size() * per)
            throw ParamError("parameter vector size mismatch (PAN)");
        for (std::size_t k = 0; k < pan.size(); ++k) {
            const double* p = theta.data() + k * per;
            std::copy(p, p + kPanHidden, pan[k].w1.begin());
            std::copy(p + kPanHidden, p + 2 * kPanHidden, pan[k].b1.begin());
            std::copy(p + 2 * kPanHidden, p + 3 * kPanHidden, pan[k].w2.begin());
            pan[k].b2 = p[3 * kPanHidden];
        }
        return;
    }
    const ParamLayout l = layout();
    if (theta.size() != l.size())
        throw ParamError("parameter vector size mismatch");
    for (std::size_t i = 0; i < l.size(); ++i) {
        switch (l.refs[i].kind) {
            case ParamKind::EdgeWeight: weights.edge_w[l.refs[i].slot] = theta[i]; break;
            case ParamKind::ChanWeight: weights.chan_w[l.refs[i].slot] = theta[i]; break;
            case ParamKind::Gamma: cfg.gamma = theta[i]; break;
            case ParamKind::Beta: rrd.beta = theta[i]; break;
        }
    }
}

std::vector<double> DecoderSetup::param_lo() const {
    if (pan_enabled)
        return std::vector<double>(params().size(),
                                   -std::numeric_limits<double>::infinity());
    return layout().lo;
}

std::vector<double> DecoderSetup::param_hi() const {
    if (pan_enabled)
        return std::vector<double>(params().size(),
                                   std::numeric_limits<double>::infinity());
    return layout().hi;
}

void DecoderSetup::init_pan(RngStream& rng) {
    const ParamLayout l = layout();
    pan.clear();
    pan.reserve(l.size());
    for (std::size_t i = 0; i < l.size(); ++i)
        pan.push_back(pan_init(l.hi[i], rng));
    pan_enabled = true;
}

std::vector<double> DecoderSetup::adapted_values(double snr_db) const {
    const ParamLayout l = layout();
    std::vector<double> vals(l.size());
    if (pan_enabled) {
        const double x = pan_input_norm(snr_db);
        for (std::size_t i = 0; i < l.size(); ++i)
            vals[i] = pan_forward(pan[i], x);
        return vals;
    }
    for (std::size_t i = 0; i < l.size(); ++i) {
        switch (l.refs[i].kind) {
            case ParamKind::EdgeWeight: vals[i] = weights.edge_w[l.refs[i].slot]; break;
            case ParamKind::ChanWeight: vals[i] = weights.chan_w[l.refs[i].slot]; break;
            case ParamKind::Gamma: vals[i] = cfg.gamma; break;
            case ParamKind::Beta: vals[i] = rrd.beta; break;
        }
    }
    return vals;
}

namespace {

std::vector<double> soft_from_marginals(const std::vector<double>& m) {
    std::vector<double> o(m.size());
    for (std::size_t v = 0; v < m.size(); ++v)
        o[v] = 1.0 - 1.0 / (1.0 + std::exp(-m[v]));
    return o;
}

// Forward pass of one WBP run recording every intermediate array. Mirrors
// decode() arithmetic exactly (same kernels, same order).
StageTape record_stage(const TannerGraph& g, const WeightModel& weights,
                       const DecoderConfig& cfg, std::size_t t_offset,
                       std::span<const double> ell, DecoderWorkspace& ws) {
    const std::size_t n_e = g.n_edges();
    const std::size_t n_v = g.n_vars;
    ws.resize(g);

    StageTape tape;
    tape.t_offset = t_offset;
    tape.ell.assign(ell.begin(), ell.end());
    std::vector<double> preclip(n_e);

    for (std::size_t t = 0; t < cfg.iterations; ++t) {
        const IterationWeights iw = weights_at(weights, t_offset + t, ws);
        const std::span<const double> we{iw.edge, n_e};
        const std::span<const double> wv{iw.chan, n_v};

        vn_update(g, we, wv, ell, ws.lam_hat, ws.lam_pre);
        tape.lam_pre.push_back(ws.lam_pre);
        damp(ws.lam, ws.lam_pre, cfg.gamma, preclip);
        tape.lam_preclip.push_back(preclip);
        std::copy(preclip.begin(), preclip.end(), ws.lam.begin());
        if (cfg.clipping_enabled()) clip_messages(ws.lam, cfg.clip_max);
        tape.lam.push_back(ws.lam);
        cn_update(g, ws.lam, ws.lam_hat_pre, ws.tanh_buf);
        tape.lam_hat_pre.push_back(ws.lam_hat_pre);
        damp(ws.lam_hat, ws.lam_hat_pre, cfg.gamma, ws.lam_hat);
        tape.lam_hat.push_back(ws.lam_hat);
        marginalize(g, we, wv, ell, ws.lam_hat, ws.m);
        for (std::size_t v = 0; v < n_v; ++v)
            if (!std::isfinite(ws.m[v]))
                throw NumericError("non-finite marginal", t_offset + t + 1);
        tape.marginals.push_back(ws.m);
    }
    return tape;
}

}  // namespace

DecodeTape record_decode(const DecoderSetup& setup, const WeightModel& weights,
                         double gamma, double beta, std::span<const double> ell,
                         RngStream perm_rng) {
    const TannerGraph& g = *setup.graph;
    DecoderWorkspace ws;
    DecodeTape tape;
    tape.ell.assign(ell.begin(), ell.end());

    DecoderConfig stage_cfg = setup.cfg;
    stage_cfg.gamma = gamma;

    if (!setup.use_rrd) {
        tape.stages.push_back(record_stage(g, weights, stage_cfg, 0, ell, ws));
        for (const auto& m : tape.stages[0].marginals) {
            tape.marginals.push_back(m);
            tape.soft.push_back(soft_from_marginals(m));
        }
        return tape;
    }

    RrdConfig rrd_cfg = setup.rrd;
    rrd_cfg.beta = beta;
    rrd_cfg.validate(setup.cfg);
    stage_cfg.iterations = rrd_cfg.t_in;

    Permutation cumulative = Permutation::identity(g.n_vars);
    std::vector<double> m_prev(ell.begin(), ell.end());
    std::vector<double> mix(g.n_vars);
    for (std::size_t tau = 0; tau < rrd_cfg.t_out; ++tau) {
        const std::vector<double> ell_frame = cumulative.apply(tape.ell);
        for (std::size_t v = 0; v < g.n_vars; ++v)
            mix[v] = rrd_cfg.beta * ell_frame[v] + (1.0 - rrd_cfg.beta) * m_prev[v];
        const Permutation pi = sample_aut(setup.sampler, perm_rng);
        cumulative = Permutation::compose(cumulative, pi);
        const std::vector<double> stage_in = pi.apply(mix);

        tape.perms.push_back(pi);
        tape.cumulative.push_back(cumulative);
        tape.stages.push_back(record_stage(g, weights, stage_cfg,
                                           tau * rrd_cfg.t_in, stage_in, ws));
        const Permutation back = cumulative.inverse();
        for (const auto& m : tape.stages.back().marginals) {
            tape.marginals.push_back(back.apply(m));
            tape.soft.push_back(soft_from_marginals(tape.marginals.back()));
        }
        m_prev = tape.stages.back().marginals.back();
    }
    return tape;
}

namespace {

// Reverse sweep through one recorded stage. dm_stage holds dL/dm per inner
// iteration in the stage frame; adjoints of the stage's channel input are
// added to dell_stage, parameter adjoints to acc.
void backward_stage(const TannerGraph& g, const WeightModel& weights,
                    double gamma, const StageTape& st,
                    const std::vector<std::vector<double>>& dm_stage,
                    GradAccum& acc, std::span<double> dell,
                    DecoderWorkspace& ws) {
    const std::size_t n_e = g.n_edges();
    const std::size_t n_v = g.n_vars;
    const std::size_t t_count = st.marginals.size();
    const std::vector<double> zeros(n_e, 0.0);

    std::vector<double> dlam_hat_carry(n_e, 0.0), dlam_carry(n_e, 0.0);
    std::vector<double> dlam_hat(n_e), dlam_hat_pre(n_e), dlam(n_e), du(n_e);
    std::vector<double> dlam_pre(n_e), tanhv(n_e);
    std::vector<double> sub, suff;  // per-check scratch

    for (std::size_t t = t_count; t-- > 0;) {
        const std::size_t global_t = st.t_offset + t;
        const IterationWeights iw = weights_at(weights, global_t, ws);
        const double* we = iw.edge;
        const double* wv = iw.chan;
        const std::vector<double>& lam_hat_t = st.lam_hat[t];
        const std::vector<double>& lam_hat_prev = t > 0 ? st.lam_hat[t - 1] : zeros;
        const std::vector<double>& lam_prev = t > 0 ? st.lam[t - 1] : zeros;

        // Marginalization: m[v] = wv[v] ell[v] + sum_e we[e] lam_hat_t[e].
        std::copy(dlam_hat_carry.begin(), dlam_hat_carry.end(), dlam_hat.begin());
        const std::vector<double>& dmv = dm_stage[t];
        for (std::size_t v = 0; v < n_v; ++v) {
            const double d = dmv[v];
            if (d == 0.0) continue;
            acc.chan_w[weights.chan_slot(global_t, v)] += d * st.ell[v];
            dell[v] += d * wv[v];
            for (const std::uint32_t e : g.var_edges(v)) {
                dlam_hat[e] += d * we[e];
                acc.edge_w[weights.edge_slot(global_t, e)] += d * lam_hat_t[e];
            }
        }

        // lam_hat[t] = gamma * lam_hat[t-1] + (1-gamma) * lam_hat_pre[t].
        for (std::size_t e = 0; e < n_e; ++e) {
            const double dh = dlam_hat[e];
            dlam_hat_pre[e] = (1.0 - gamma) * dh;
            acc.gamma += dh * (lam_hat_prev[e] - st.lam_hat_pre[t][e]);
            dlam_hat_carry[e] = gamma * dh;
        }

        // Check update: lam_hat_pre[e] = 2 atanh(prod_{e' != e} tanh(lam[e']/2)).
        for (std::size_t e = 0; e < n_e; ++e)
            tanhv[e] = std::tanh(st.lam[t][e] / 2.0);
        std::fill(dlam.begin(), dlam.end(), 0.0);
        for (std::size_t c = 0; c < g.n_checks; ++c) {
            const auto adj = g.check_edges(c);
            const std::size_t deg = adj.size();
            if (deg < 2) continue;  // degree-1 checks emit a constant
            for (std::size_t i = 0; i < deg; ++i) {
                const double dout = dlam_hat_pre[adj[i]];
                if (dout == 0.0) continue;
                // Factors over the other edges; suffix products give the
                // per-factor exclusions robustly even when factors are zero.
                sub.clear();
                for (std::size_t j = 0; j < deg; ++j)
                    if (j != i) sub.push_back(tanhv[adj[j]]);
                const std::size_t count = sub.size();
                suff.resize(count + 1);
                suff[count] = 1.0;
                for (std::size_t j = count; j-- > 0;)
                    suff[j] = sub[j] * suff[j + 1];
                const double p = suff[0];
                const double dp = dout * 2.0 / (1.0 - p * p);
                double pref = 1.0;
                std::size_t k = 0;
                for (std::size_t j = 0; j < deg; ++j) {
                    if (j == i) continue;
                    const double excl = pref * suff[k + 1];
                    const double tj = sub[k];
                    dlam[adj[j]] += dp * excl * (1.0 - tj * tj) / 2.0;
                    pref *= tj;
                    ++k;
                }
            }
        }

        // Clip: identity inside the active range, zero on the flats.
        for (std::size_t e = 0; e < n_e; ++e) {
            const double dl = dlam[e] + dlam_carry[e];
            du[e] = (st.lam[t][e] == st.lam_preclip[t][e]) ? dl : 0.0;
        }

        // lam_preclip[t] = gamma * lam[t-1] + (1-gamma) * lam_pre[t].
        for (std::size_t e = 0; e < n_e; ++e) {
            dlam_pre[e] = (1.0 - gamma) * du[e];
            acc.gamma += du[e] * (lam_prev[e] - st.lam_pre[t][e]);
            dlam_carry[e] = gamma * du[e];
        }

        // Variable update: lam_pre[e] = wv[v] ell[v] +
        //   sum_{e' in adj(v), e' != e} we[e'] lam_hat_prev[e'].
        for (std::size_t v = 0; v < n_v; ++v) {
            const auto adj = g.var_edges(v);
            double total = 0.0;
            for (const std::uint32_t e : adj) total += dlam_pre[e];
            if (total != 0.0) {
                acc.chan_w[weights.chan_slot(global_t, v)] += total * st.ell[v];
                dell[v] += total * wv[v];
            }
            for (const std::uint32_t e : adj) {
                const double dother = total - dlam_pre[e];
                if (dother == 0.0) continue;
                dlam_hat_carry[e] += dother * we[e];
                acc.edge_w[weights.edge_slot(global_t, e)] +=
                    dother * lam_hat_prev[e];
            }
        }
    }
    // Adjoints flowing into the zero-initialized messages end here.
}

}  // namespace

GradAccum backward(const DecoderSetup& setup, const WeightModel& weights,
                   double gamma, double beta, const DecodeTape& tape,
                   const std::vector<std::vector<double>>& dm) {
    const TannerGraph& g = *setup.graph;
    const std::size_t n_v = g.n_vars;
    GradAccum acc;
    acc.edge_w.assign(weights.edge_w.size(), 0.0);
    acc.chan_w.assign(weights.chan_w.size(), 0.0);
    acc.ell.assign(n_v, 0.0);
    DecoderWorkspace ws;
    ws.resize(g);

    std::vector<double> dm_prev;  // adjoint of previous stage's final marginals
    for (std::size_t tau = tape.stages.size(); tau-- > 0;) {
        const StageTape& st = tape.stages[tau];
        const std::size_t t_in = st.marginals.size();
        std::vector<std::vector<double>> dm_stage(t_in);
        for (std::size_t s = 0; s < t_in; ++s) {
            const std::vector<double>& seed = dm[st.t_offset + s];
            dm_stage[s] = setup.use_rrd ? tape.cumulative[tau].apply(seed) : seed;
        }
        if (!dm_prev.empty())
            for (std::size_t v = 0; v < n_v; ++v) dm_stage[t_in - 1][v] += dm_prev[v];

        std::vector<double> dell_stage(n_v, 0.0);
        backward_stage(g, weights, gamma, st, dm_stage, acc, dell_stage, ws);

        if (!setup.use_rrd) {
            for (std::size_t v = 0; v < n_v; ++v) acc.ell[v] += dell_stage[v];
            continue;
        }
        // stage_in = pi(beta * ell_frame + (1-beta) * m_prev).
        const std::vector<double> dmix = tape.perms[tau].inverse().apply(dell_stage);
        const Permutation cum_prev = tau > 0 ? tape.cumulative[tau - 1]
                                             : Permutation::identity(n_v);
        const std::vector<double> ell_frame = cum_prev.apply(tape.ell);
        const std::vector<double>& m_prev_val =
            tau > 0 ? tape.stages[tau - 1].marginals.back() : tape.ell;
        for (std::size_t v = 0; v < n_v; ++v)
            acc.beta += dmix[v] * (ell_frame[v] - m_prev_val[v]);
        const std::vector<double> dell_part = cum_prev.inverse().apply(dmix);
        for (std::size_t v = 0; v < n_v; ++v)
            acc.ell[v] += beta * dell_part[v];
        if (tau > 0) {
            dm_prev.assign(n_v, 0.0);
            for (std::size_t v = 0; v < n_v; ++v)
                dm_prev[v] = (1.0 - beta) * dmix[v];
        } else {
            for (std::size_t v = 0; v < n_v; ++v)
                acc.ell[v] += (1.0 - beta) * dmix[v];
        }
    }
    return acc;
}

SampleResult sample_loss(const DecoderSetup& setup, const Sample& sample,
                         LossKind kind, double eta, std::uint64_t perm_seed,
                         std::uint64_t frame_id, bool want_grad,
                         DecoderWorkspace* ws) {
    (void)ws;
    const double snr_linear = std::pow(10.0, sample.snr_db / 10.0);
    const std::vector<double> ell =
        channel_llr(sample.y, setup.rate, snr_linear);

    // Resolve effective decoder parameters (per-sample under PAN).
    WeightModel adapted_weights;
    const WeightModel* w = &setup.weights;
    double gamma = setup.cfg.gamma;
    double beta = setup.rrd.beta;
    const ParamLayout l = setup.layout();
    if (setup.pan_enabled) {
        adapted_weights = setup.weights;
        const std::vector<double> vals = setup.adapted_values(sample.snr_db);
        for (std::size_t i = 0; i < l.size(); ++i) {
            switch (l.refs[i].kind) {
                case ParamKind::EdgeWeight:
                    adapted_weights.edge_w[l.refs[i].slot] = vals[i];
                    break;
                case ParamKind::ChanWeight:
                    adapted_weights.chan_w[l.refs[i].slot] = vals[i];
                    break;
                case ParamKind::Gamma: gamma = vals[i]; break;
                case ParamKind::Beta: beta = vals[i]; break;
            }
        }
        w = &adapted_weights;
    }

    RngStream perm_rng =
        RngStream::keyed(perm_seed, kStreamPermutation, frame_id);
    const DecodeTape tape =
        record_decode(setup, *w, gamma, beta, ell, perm_rng);

    SampleResult result;
    result.loss = multi_loss(kind, eta, sample.x, tape.soft);
    if (!want_grad) return result;

    const std::size_t t_total = tape.soft.size();
    const std::size_t n = sample.x.size();
    const std::vector<double> cw = multi_loss_weights(eta, t_total);
    std::vector<std::vector<double>> dm(t_total, std::vector<double>(n, 0.0));
    for (std::size_t t = 0; t < t_total; ++t) {
        const double scale = cw[t] / static_cast<double>(n);
        if (scale == 0.0) continue;
        for (std::size_t v = 0; v < n; ++v) {
            const double o = tape.soft[t][v];
            const double dl_do = bit_loss_derivative(kind, sample.x[v], o);
            dm[t][v] = scale * dl_do * (-(1.0 - o) * o);
        }
    }

    const GradAccum acc = backward(setup, *w, gamma, beta, tape, dm);
    std::vector<double> direct(l.size());
    for (std::size_t i = 0; i < l.size(); ++i) {
        switch (l.refs[i].kind) {
            case ParamKind::EdgeWeight: direct[i] = acc.edge_w[l.refs[i].slot]; break;
            case ParamKind::ChanWeight: direct[i] = acc.chan_w[l.refs[i].slot]; break;
            case ParamKind::Gamma: direct[i] = acc.gamma; break;
            case ParamKind::Beta: direct[i] = acc.beta; break;
        }
    }
    if (setup.pan_enabled) {
        const std::size_t per = 3 * kPanHidden + 1;
        result.grad.assign(l.size() * per, 0.0);
        const double x = pan_input_norm(sample.snr_db);
        for (std::size_t i = 0; i < l.size(); ++i)
            pan_backward(setup.pan[i], x, direct[i],
                         {result.grad.data() + i * per, per});
    } else {
        result.grad = std::move(direct);
    }
    for (std::size_t i = 0; i < result.grad.size(); ++i)
        if (!std::isfinite(result.grad[i])) {
            const std::string name =
                setup.pan_enabled ? "pan[" + std::to_string(i) + "]" : l.names[i];
            throw NumericError("non-finite adjoint for parameter " + name, 0);
        }
    return result;
}

BatchResult batch_loss_grad(const DecoderSetup& setup,
                            const std::vector<Sample>& batch, LossKind kind,
                            double eta, std::uint64_t perm_seed,
                            std::uint64_t frame_base, bool want_grad,
                            unsigned workers) {
    if (batch.empty()) throw ParamError("batch must be nonempty");
    if (workers == 0) workers = 1;
    std::vector<SampleResult> results(batch.size());

    auto run = [&](std::size_t i) {
        results[i] = sample_loss(setup, batch[i], kind, eta, perm_seed,
                                 (frame_base << 20) + i, want_grad);
    };
    if (workers == 1 || batch.size() == 1) {
        for (std::size_t i = 0; i < batch.size(); ++i) run(i);
    } else {
        std::atomic<std::size_t> next{0};
        auto work = [&] {
            std::size_t i;
            while ((i = next.fetch_add(1)) < batch.size()) run(i);
        };
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
        for (auto& th : pool) th.join();
    }

    // Deterministic ordered reduction over sample index.
    BatchResult out;
    const double inv = 1.0 / static_cast<double>(batch.size());
    if (want_grad) out.grad.assign(results[0].grad.size(), 0.0);
    for (const SampleResult& r : results) {
        out.loss += r.loss;
        if (want_grad)
            for (std::size_t j = 0; j < out.grad.size(); ++j)
                out.grad[j] += r.grad[j];
    }
    out.loss *= inv;
    if (want_grad)
        for (double& gv : out.grad) gv *= inv;
    return out;
}

double batch_loss(const DecoderSetup& setup, const std::vector<Sample>& batch,
                  LossKind kind, double eta, std::uint64_t perm_seed,
                  std::uint64_t frame_base, unsigned workers) {
    return batch_loss_grad(setup, batch, kind, eta, perm_seed, frame_base,
                           false, workers)
        .loss;
}

double global_norm_clip(std::span<double> g, double threshold) {
    double sq = 0.0;
    for (const double x : g) sq += x * x;
    const double norm = std::sqrt(sq);
    if (norm > threshold && norm > 0.0) {
        const double scale = threshold / norm;
        for (double& x : g) x *= scale;
    }
    return norm;
}

void rmsprop_step(OptimizerState& state, std::span<double> theta,
                  std::span<const double> lo, std::span<const double> hi,
                  std::span<const double> g, double alpha) {
    if (state.s.size() != theta.size())
        throw ParamError("optimizer state size mismatch");
    for (std::size_t i = 0; i < theta.size(); ++i) {
        if (!std::isfinite(g[i]))
            throw NumericError("non-finite gradient in optimizer step", i);
        state.s[i] = state.decay * state.s[i] + (1.0 - state.decay) * g[i] * g[i];
        const double step = alpha * g[i] / (std::sqrt(state.s[i]) + state.eps);
        theta[i] = std::clamp(theta[i] - step, lo[i], hi[i]);
    }
}

SchedulePoint schedule_tick(const TrainConfig& cfg, std::uint64_t step) {
    const double k = static_cast<double>(step / cfg.decay_interval);
    return {cfg.alpha0 * std::pow(cfg.alpha_decay, k),
            cfg.eta0 * std::pow(cfg.eta_decay, k)};
}

std::vector<double> snapshot_values(const DecoderSetup& setup) {
    if (setup.pan_enabled || !setup.weights.scalar_per_iteration()) return {};
    std::vector<double> snap;
    snap.insert(snap.end(), setup.weights.edge_w.begin(), setup.weights.edge_w.end());
    snap.insert(snap.end(), setup.weights.chan_w.begin(), setup.weights.chan_w.end());
    snap.push_back(setup.cfg.gamma);
    if (setup.use_rrd) snap.push_back(setup.rrd.beta);
    return snap;
}

std::vector<std::string> snapshot_names(const DecoderSetup& setup) {
    if (setup.pan_enabled || !setup.weights.scalar_per_iteration()) return {};
    std::vector<std::string> names;
    const bool per_iter = setup.weights.variant == WeightVariant::SS;
    for (std::size_t t = 0; t < setup.weights.edge_w.size(); ++t)
        names.push_back(per_iter ? "w_msg[" + std::to_string(t) + "]" : "w_msg");
    for (std::size_t t = 0; t < setup.weights.chan_w.size(); ++t)
        names.push_back(per_iter ? "w_ch[" + std::to_string(t) + "]" : "w_ch");
    names.push_back("gamma");
    if (setup.use_rrd) names.push_back("beta");
    return names;
}

TrainResult train(DecoderSetup& setup, const TrainConfig& cfg, unsigned workers,
                  std::ostream* log_csv) {
    const std::vector<double> grid =
        snr_grid_db(cfg.snr_lo_db, cfg.snr_hi_db, cfg.snr_points);
    std::vector<double> theta = setup.params();
    const std::vector<double> lo = setup.param_lo();
    const std::vector<double> hi = setup.param_hi();

    TrainResult result;
    result.opt.s.assign(theta.size(), 0.0);
    result.opt.decay = cfg.rms_decay;
    result.opt.eps = cfg.rms_eps;

    const std::vector<std::string> snap_names = snapshot_names(setup);
    if (log_csv) {
        *log_csv << "step,alpha,eta,batch_loss";
        for (const auto& n : snap_names) *log_csv << "," << n;
        *log_csv << "\n";
    }

    for (std::uint64_t step = 0; step < cfg.steps; ++step) {
        const SchedulePoint sp = schedule_tick(cfg, step);
        const std::vector<Sample> batch =
            training_batch(grid, cfg.batch_per_point, setup.graph->n_vars,
                           setup.rate, cfg.seed, step);
        BatchResult br = batch_loss_grad(setup, batch, cfg.loss, sp.eta,
                                         cfg.seed, step, true, workers);
        global_norm_clip(br.grad, cfg.grad_clip);
        rmsprop_step(result.opt, theta, lo, hi, br.grad, sp.alpha);
        setup.set_params(theta);

        TrainLogRow row;
        row.step = step;
        row.alpha = sp.alpha;
        row.eta = sp.eta;
        row.loss = br.loss;
        row.snapshot = snapshot_values(setup);
        if (log_csv) {
            *log_csv << row.step << "," << format_double(row.alpha) << ","
                     << format_double(row.eta) << "," << format_double(row.loss);
            for (const double v : row.snapshot)
                *log_csv << "," << format_double(v);
            *log_csv << "\n";
        }
        result.log.push_back(std::move(row));
    }
    return result;
}

void checkpoint_to_doc(KvDoc& doc, const DecoderSetup& setup,
                       std::uint64_t matrix_hash, const OptimizerState* opt) {
    doc.set("meta", "format", "wbplab-checkpoint-1");
    weights_to_doc(doc, setup.weights, setup.cfg, matrix_hash);
    doc.set_bool("rrd", "enabled", setup.use_rrd);
    if (setup.use_rrd) {
        doc.set_int("rrd", "t_in", static_cast<std::int64_t>(setup.rrd.t_in));
        doc.set_int("rrd", "t_out", static_cast<std::int64_t>(setup.rrd.t_out));
        doc.set_double("rrd", "beta", setup.rrd.beta);
    }
    doc.set_bool("pan", "enabled", setup.pan_enabled);
    if (setup.pan_enabled) {
        doc.set_int("pan", "nets", static_cast<std::int64_t>(setup.pan.size()));
        for (std::size_t i = 0; i < setup.pan.size(); ++i) {
            const std::string p = "net" + std::to_string(i) + ".";
            doc.set_doubles("pan", p + "w1", setup.pan[i].w1);
            doc.set_doubles("pan", p + "b1", setup.pan[i].b1);
            doc.set_doubles("pan", p + "w2", setup.pan[i].w2);
            doc.set_double("pan", p + "b2", setup.pan[i].b2);
            doc.set_double("pan", p + "scale", setup.pan[i].out_scale);
        }
    }
    if (opt) {
        doc.set_doubles("optimizer", "s", opt->s);
        doc.set_double("optimizer", "decay", opt->decay);
        doc.set_double("optimizer", "eps", opt->eps);
    }
}

void checkpoint_from_doc(const KvDoc& doc, DecoderSetup& setup,
                         std::uint64_t matrix_hash) {
    weights_from_doc(doc, setup.weights, setup.cfg, matrix_hash);
    setup.weights.validate(*setup.graph);
    setup.use_rrd = doc.get_bool("rrd", "enabled", false);
    if (setup.use_rrd) {
        setup.rrd.t_in = static_cast<std::size_t>(doc.get_int("rrd", "t_in"));
        setup.rrd.t_out = static_cast<std::size_t>(doc.get_int("rrd", "t_out"));
        setup.rrd.beta = doc.get_double("rrd", "beta");
    }
    setup.pan_enabled = doc.get_bool("pan", "enabled", false);
    setup.pan.clear();
    if (setup.pan_enabled) {
        const std::size_t nets =
            static_cast<std::size_t>(doc.get_int("pan", "nets"));
        for (std::size_t i = 0; i < nets; ++i) {
            const std::string p = "net" + std::to_string(i) + ".";
            PanNet net;
            net.w1 = doc.get_doubles("pan", p + "w1");
            net.b1 = doc.get_doubles("pan", p + "b1");
            net.w2 = doc.get_doubles("pan", p + "w2");
            net.b2 = doc.get_double("pan", p + "b2");
            net.out_scale = doc.get_double("pan", p + "scale");
            if (net.w1.size() != kPanHidden || net.b1.size() != kPanHidden ||
                net.w2.size() != kPanHidden)
                throw StructuralError("checkpoint PAN layer has wrong size");
            setup.pan.push_back(std::move(net));
        }
        if (setup.pan.size() != setup.layout().size())
            throw StructuralError(
                "checkpoint PAN count does not match trainable parameters");
    }
}

}  // namespace wbplab
