#include "wbplab/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "wbplab/errors.hpp"

namespace wbplab {

LoadedCode load_code(const KvDoc& cfg) {
    LoadedCode lc;
    const std::string type = cfg.require("code", "type");
    if (type == "rm") {
        const unsigned r = static_cast<unsigned>(cfg.get_int("code", "r"));
        const unsigned m = static_cast<unsigned>(cfg.get_int("code", "m"));
        lc.code = code_from_generator(rm_generator(r, m));
        lc.is_rm = true;
        lc.rm_m = m;
        lc.label = "rm(" + std::to_string(lc.code.n) + "," +
                   std::to_string(lc.code.k) + ")";
        lc.matrix_name = cfg.get("code", "matrix").value_or("std");
        if (lc.matrix_name == "oc")
            lc.code.add_pcm("oc", enumerate_min_weight_dual(lc.code));
        else if (lc.matrix_name != "std")
            throw ParamError("rm codes provide matrices 'std' and 'oc'");
    } else if (type == "alist") {
        const std::string path = cfg.require("code", "alist");
        lc.matrix_name = cfg.get("code", "matrix").value_or("file");
        lc.code = code_from_pcm(lc.matrix_name, parse_alist_file(path));
        std::string stem = path;
        if (const auto slash = stem.find_last_of('/'); slash != std::string::npos)
            stem = stem.substr(slash + 1);
        if (const auto dot = stem.find_last_of('.'); dot != std::string::npos)
            stem = stem.substr(0, dot);
        lc.label = cfg.get("code", "name").value_or(stem);
    } else {
        throw ParamError("code type must be 'rm' or 'alist'");
    }
    lc.graph = build_graph(lc.code.pcm(lc.matrix_name));
    lc.h_hash = matrix_hash(lc.code.pcm(lc.matrix_name));
    if (lc.graph.has_degenerate_nodes())
        std::fprintf(stderr, "warning: matrix has degree-0 nodes (%zu vars, %zu checks)\n",
                     lc.graph.degenerate_vars.size(),
                     lc.graph.degenerate_checks.size());
    return lc;
}

DecoderSetup make_setup(const KvDoc& cfg, const LoadedCode& lc) {
    DecoderSetup setup;
    setup.graph = &lc.graph;
    setup.rate = lc.code.rate();

    const WeightVariant variant =
        variant_from_tag(cfg.get("decoder", "model").value_or("rnn-ss"));
    setup.use_rrd = cfg.get_bool("decoder", "rrd", false);
    std::size_t t_total;
    if (setup.use_rrd) {
        setup.rrd.t_in = static_cast<std::size_t>(cfg.get_int("decoder", "t_in"));
        setup.rrd.t_out = static_cast<std::size_t>(cfg.get_int("decoder", "t_out"));
        setup.rrd.beta = cfg.get_double("decoder", "beta", 0.5);
        t_total = setup.rrd.total_iterations();
        setup.sampler = lc.is_rm
                            ? AutSampler{AutFamily::RmAffine, lc.rm_m}
                            : AutSampler{AutFamily::CyclicFrobenius, lc.code.n};
    } else {
        t_total = static_cast<std::size_t>(cfg.get_int("decoder", "t", 5));
    }
    setup.cfg.iterations = t_total;
    setup.cfg.gamma = cfg.get_double("decoder", "gamma", 0.0);
    setup.cfg.clip_max = cfg.get_double("decoder", "clip_max", 15.0);
    setup.cfg.validate();
    setup.weights =
        WeightModel::ones(variant, t_total, lc.graph.n_edges(), lc.graph.n_vars);

    setup.sel = {false, false, false, false};
    std::vector<std::string> tokens{"w_msg", "w_ch"};
    if (cfg.has("train", "trainable")) tokens = cfg.get_words("train", "trainable");
    for (const std::string& tok : tokens) {
        if (tok == "w_msg" || tok == "edges")
            setup.sel.edge_weights = true;
        else if (tok == "w_ch" || tok == "channel")
            setup.sel.chan_weights = true;
        else if (tok == "gamma")
            setup.sel.gamma = true;
        else if (tok == "beta")
            setup.sel.beta = true;
        else
            throw ParamError("unknown trainable parameter '" + tok + "'");
    }

    if (cfg.get_bool("decoder", "pan", false)) {
        RngStream rng = RngStream::keyed(
            static_cast<std::uint64_t>(cfg.get_int("train", "seed", 1)),
            kStreamInit);
        setup.init_pan(rng);
    }
    return setup;
}

TrainConfig make_train_config(const KvDoc& cfg) {
    TrainConfig tc;
    tc.steps = static_cast<std::uint64_t>(cfg.get_int("train", "steps", 0));
    tc.batch_per_point =
        static_cast<std::size_t>(cfg.get_int("train", "batch_per_point", 10));
    tc.snr_lo_db = cfg.get_double("train", "snr_lo", 1.0);
    tc.snr_hi_db = cfg.get_double("train", "snr_hi", 8.0);
    tc.snr_points = static_cast<std::size_t>(cfg.get_int("train", "snr_points", 10));
    tc.loss = loss_from_tag(cfg.get("train", "loss").value_or("soft-ber"));
    tc.alpha0 = cfg.get_double("train", "alpha0", 1e-3);
    tc.alpha_decay = cfg.get_double("train", "alpha_decay", 0.8);
    tc.eta0 = cfg.get_double("train", "eta0", 1.0);
    tc.eta_decay = cfg.get_double("train", "eta_decay", 0.5);
    tc.decay_interval =
        static_cast<std::uint64_t>(cfg.get_int("train", "decay_interval", 5000));
    tc.grad_clip = cfg.get_double("train", "grad_clip", 0.1);
    tc.seed = static_cast<std::uint64_t>(cfg.get_int("train", "seed", 1));
    return tc;
}

DecodeFn make_decode_fn(const DecoderSetup& setup, std::uint64_t perm_seed,
                        unsigned workers) {
    auto workspaces = std::make_shared<std::vector<DecoderWorkspace>>(
        std::max(1u, workers));
    // Copy the setup so the closure owns stable decoder state.
    auto owned = std::make_shared<DecoderSetup>(setup);
    return [owned, workspaces, perm_seed](const std::vector<double>& llr,
                                          std::vector<std::uint8_t>& out,
                                          unsigned worker, std::uint64_t frame) {
        DecoderWorkspace& ws = (*workspaces)[worker];
        if (owned->use_rrd) {
            RngStream rng = RngStream::keyed(perm_seed, kStreamPermutation, frame);
            const DecoderTrace trace =
                rrd_decode(*owned->graph, owned->weights, owned->cfg, owned->rrd,
                           owned->sampler, llr, rng, {}, &ws);
            out = trace.hard;
        } else {
            const DecoderTrace trace =
                decode(*owned->graph, owned->weights, owned->cfg, llr, {}, &ws);
            out = trace.hard;
        }
    };
}

namespace {

std::string decoder_label(const DecoderSetup& setup) {
    bool plain = !setup.pan_enabled && setup.cfg.gamma == 0.0;
    for (const double w : setup.weights.edge_w) plain = plain && w == 1.0;
    for (const double w : setup.weights.chan_w) plain = plain && w == 1.0;
    std::string tag = plain ? "bp" : variant_tag(setup.weights.variant);
    if (setup.pan_enabled) tag += "-pan";
    if (setup.use_rrd) tag += "-rrd";
    return tag;
}

// Materialize PAN outputs into plain decoder parameters for one SNR.
DecoderSetup freeze_at_snr(const DecoderSetup& setup, double snr_db) {
    if (!setup.pan_enabled) return setup;
    DecoderSetup frozen = setup;
    const ParamLayout l = setup.layout();
    const std::vector<double> vals = setup.adapted_values(snr_db);
    for (std::size_t i = 0; i < l.size(); ++i) {
        switch (l.refs[i].kind) {
            case ParamKind::EdgeWeight:
                frozen.weights.edge_w[l.refs[i].slot] = vals[i];
                break;
            case ParamKind::ChanWeight:
                frozen.weights.chan_w[l.refs[i].slot] = vals[i];
                break;
            case ParamKind::Gamma: frozen.cfg.gamma = vals[i]; break;
            case ParamKind::Beta: frozen.rrd.beta = vals[i]; break;
        }
    }
    frozen.pan_enabled = false;
    frozen.pan.clear();
    return frozen;
}

}  // namespace

std::vector<EvalRow> evaluate_run(const DecoderSetup& setup,
                                  const LoadedCode& lc, const KvDoc& cfg,
                                  unsigned workers) {
    const std::vector<double> snrs = cfg.get_doubles("eval", "snrs");
    StopRule stop;
    stop.min_bit_errors =
        static_cast<std::uint64_t>(cfg.get_int("eval", "min_errors", 100));
    stop.max_frames =
        static_cast<std::uint64_t>(cfg.get_int("eval", "max_frames", 10000000));
    const std::uint64_t seed =
        static_cast<std::uint64_t>(cfg.get_int("eval", "seed", 7));
    const bool with_osd = cfg.get_bool("eval", "osd", false);
    const unsigned osd_order =
        static_cast<unsigned>(cfg.get_int("eval", "osd_order", 3));

    std::vector<EvalRow> rows;
    for (const double snr : snrs) {
        const DecoderSetup frozen = freeze_at_snr(setup, snr);
        const DecodeFn fn = make_decode_fn(frozen, seed, workers);
        ChannelConfig cc{lc.code.rate(), snr};
        EvalRow row;
        row.decoder = decoder_label(setup);
        row.snr_db = snr;
        row.est = estimate_ber(fn, lc.code, cc, stop, seed, workers);
        rows.push_back(std::move(row));
    }
    if (with_osd) {
        const OsdConfig osd_cfg{osd_order};
        const Code& code = lc.code;
        DecodeFn osd_fn = [&code, osd_cfg](const std::vector<double>& llr,
                                           std::vector<std::uint8_t>& out,
                                           unsigned, std::uint64_t) {
            out = osd_decode(code, llr, osd_cfg);
        };
        for (const double snr : snrs) {
            ChannelConfig cc{lc.code.rate(), snr};
            EvalRow row;
            row.decoder = "osd";
            row.snr_db = snr;
            row.est = estimate_ber(osd_fn, lc.code, cc, stop, seed, workers);
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<SweepPoint> sweep_loss_run(DecoderSetup setup, const LoadedCode& lc,
                                       const std::string& param, double lo,
                                       double hi, std::size_t points,
                                       double snr_db, std::uint64_t frames,
                                       std::uint64_t seed, unsigned workers) {
    if (points == 0) throw ParamError("sweep needs at least one grid point");
    if (workers == 0) workers = 1;
    const std::size_t n = lc.code.n;
    const ChannelConfig cc{lc.code.rate(), snr_db};
    const double snr_linear = cc.snr_linear();
    const std::vector<std::uint8_t> zero(n, 0);

    // Frozen sample set: one LLR vector per frame, reused for every grid
    // value.
    std::vector<std::vector<double>> llrs(frames);
    for (std::uint64_t f = 0; f < frames; ++f) {
        RngStream rng = RngStream::keyed(seed, kStreamNoise, f);
        llrs[f] = channel_llr(transmit(zero, cc, rng), cc.rate, snr_linear);
    }

    auto set_param = [&param](DecoderSetup& s, double value) {
        if (param == "w_msg")
            std::fill(s.weights.edge_w.begin(), s.weights.edge_w.end(), value);
        else if (param == "w_ch")
            std::fill(s.weights.chan_w.begin(), s.weights.chan_w.end(), value);
        else if (param == "gamma")
            s.cfg.gamma = value;
        else if (param == "beta")
            s.rrd.beta = value;
        else
            throw ParamError("unknown sweep parameter '" + param + "'");
    };

    std::vector<SweepPoint> result;
    std::vector<double> frame_ce(frames), frame_nss(frames), frame_sb(frames);
    std::vector<double> frame_ber(frames);
    for (std::size_t p = 0; p < points; ++p) {
        const double value =
            points == 1 ? lo
                        : lo + (hi - lo) * static_cast<double>(p) /
                                   static_cast<double>(points - 1);
        set_param(setup, value);

        std::atomic<std::uint64_t> next{0};
        auto work = [&] {
            DecoderWorkspace ws;
            std::uint64_t f;
            while ((f = next.fetch_add(1)) < frames) {
                const DecoderTrace trace =
                    decode(*setup.graph, setup.weights, setup.cfg, llrs[f], {}, &ws);
                const auto& o = trace.soft.back();
                frame_ce[f] = codeword_loss(LossKind::BinaryCrossEntropy, zero, o);
                frame_nss[f] = codeword_loss(LossKind::NegSoftSuccess, zero, o);
                frame_sb[f] = codeword_loss(LossKind::SoftBer, zero, o);
                std::size_t errs = 0;
                for (const std::uint8_t bit : trace.hard) errs += bit;
                frame_ber[f] = static_cast<double>(errs) / static_cast<double>(n);
            }
        };
        if (workers == 1) {
            work();
        } else {
            std::vector<std::thread> pool;
            for (unsigned t = 0; t < workers; ++t) pool.emplace_back(work);
            for (auto& th : pool) th.join();
        }

        // Ordered reduction over the frame index.
        SweepPoint pt;
        pt.value = value;
        for (std::uint64_t f = 0; f < frames; ++f) {
            pt.ce += frame_ce[f];
            pt.nss += frame_nss[f];
            pt.soft_ber += frame_sb[f];
            pt.ber += frame_ber[f];
        }
        const double fc = static_cast<double>(frames);
        pt.ce /= fc;
        pt.nss /= fc;
        pt.soft_ber /= fc;
        pt.ber /= fc;
        double var = 0.0;
        for (std::uint64_t f = 0; f < frames; ++f) {
            const double d = frame_ber[f] - pt.ber;
            var += d * d;
        }
        pt.ber_se = frames > 1 ? std::sqrt(var / (fc * (fc - 1.0))) : 0.0;
        result.push_back(pt);
    }
    return result;
}

namespace {

void write_provenance(std::ostream& out, const KvDoc& cfg,
                      const LoadedCode& lc) {
    out << "# matrix = " << lc.label << "/" << lc.matrix_name << "\n";
    out << "# matrix_hash = " << lc.h_hash << "\n";
    std::istringstream serialized(cfg.serialize_string());
    std::string line;
    while (std::getline(serialized, line))
        if (!line.empty()) out << "# " << line << "\n";
}

}  // namespace

void write_eval_csv(std::ostream& out, const KvDoc& cfg, const LoadedCode& lc,
                    const std::vector<EvalRow>& rows, std::uint64_t seed) {
    write_provenance(out, cfg, lc);
    out << "code,matrix,decoder,snr_db,frames,bit_errors,ber,ci_low,ci_high,seed\n";
    for (const EvalRow& r : rows) {
        out << lc.label << "," << lc.matrix_name << "," << r.decoder << ","
            << format_double(r.snr_db) << "," << r.est.frames << ","
            << r.est.bit_errors << "," << format_double(r.est.ber) << ","
            << format_double(r.est.ci_low) << "," << format_double(r.est.ci_high)
            << "," << seed << "\n";
    }
}

void write_sweep_csv(std::ostream& out, const KvDoc& cfg, const LoadedCode& lc,
                     const std::string& param,
                     const std::vector<SweepPoint>& points) {
    write_provenance(out, cfg, lc);
    out << param << ",ce,nss,soft_ber,ber\n";
    for (const SweepPoint& p : points) {
        out << format_double(p.value) << "," << format_double(p.ce) << ","
            << format_double(p.nss) << "," << format_double(p.soft_ber) << ","
            << format_double(p.ber) << "\n";
    }
}

namespace {

int cmd_build_matrix(const std::vector<std::string>& pos, bool oc,
                     const std::string& out_path) {
    BitMatrix h;
    if (pos.empty()) throw ParamError("expected 'rm R M' or 'alist PATH'");
    if (pos[0] == "rm") {
        if (pos.size() != 3) throw ParamError("usage: build-matrix rm R M");
        const unsigned r = static_cast<unsigned>(std::stoul(pos[1]));
        const unsigned m = static_cast<unsigned>(std::stoul(pos[2]));
        const Code code = code_from_generator(rm_generator(r, m));
        h = oc ? enumerate_min_weight_dual(code) : code.pcm("std");
    } else if (pos[0] == "alist") {
        if (pos.size() != 2) throw ParamError("usage: build-matrix alist PATH");
        if (oc) {
            const Code code = code_from_pcm("file", parse_alist_file(pos[1]));
            h = enumerate_min_weight_dual(code);
        } else {
            h = parse_alist_file(pos[1]);
        }
    } else {
        throw ParamError("unknown code spec '" + pos[0] + "'");
    }
    write_alist_file(out_path, h);
    std::printf("%zu x %zu matrix written to %s\n", h.rows(), h.cols(),
                out_path.c_str());
    return 0;
}

int cmd_train(const std::string& config_path, const std::string& ckpt_path,
              const std::string& log_path, unsigned workers,
              std::int64_t seed_override) {
    KvDoc cfg = KvDoc::parse_file(config_path);
    if (seed_override >= 0) cfg.set_int("train", "seed", seed_override);
    const LoadedCode lc = load_code(cfg);
    DecoderSetup setup = make_setup(cfg, lc);
    const TrainConfig tc = make_train_config(cfg);

    std::ofstream log(log_path);
    if (!log) throw ParamError("cannot open log file: " + log_path);
    const TrainResult result = train(setup, tc, workers, &log);

    KvDoc ckpt;
    checkpoint_to_doc(ckpt, setup, lc.h_hash, &result.opt);
    ckpt.write_file(ckpt_path);

    const std::vector<double> snap = snapshot_values(setup);
    const std::vector<std::string> names = snapshot_names(setup);
    for (std::size_t i = 0; i < snap.size(); ++i)
        std::printf("%s = %s\n", names[i].c_str(),
                    format_double(snap[i]).c_str());
    std::printf("checkpoint written to %s\n", ckpt_path.c_str());
    return 0;
}

int cmd_evaluate(const std::string& config_path, const std::string& ckpt_path,
                 const std::string& out_path, unsigned workers,
                 std::int64_t seed_override) {
    KvDoc cfg = KvDoc::parse_file(config_path);
    if (seed_override >= 0) cfg.set_int("eval", "seed", seed_override);
    const LoadedCode lc = load_code(cfg);
    DecoderSetup setup = make_setup(cfg, lc);
    if (!ckpt_path.empty()) {
        const KvDoc ckpt = KvDoc::parse_file(ckpt_path);
        checkpoint_from_doc(ckpt, setup, lc.h_hash);
    }
    const std::vector<EvalRow> rows = evaluate_run(setup, lc, cfg, workers);
    std::ofstream out(out_path);
    if (!out) throw ParamError("cannot open output file: " + out_path);
    write_eval_csv(out, cfg, lc, rows,
                   static_cast<std::uint64_t>(cfg.get_int("eval", "seed", 7)));
    std::printf("%zu rows written to %s\n", rows.size(), out_path.c_str());
    return 0;
}

int cmd_sweep_loss(const std::string& config_path, const std::string& out_path,
                   unsigned workers, std::int64_t seed_override) {
    KvDoc cfg = KvDoc::parse_file(config_path);
    if (seed_override >= 0) cfg.set_int("sweep", "seed", seed_override);
    const LoadedCode lc = load_code(cfg);
    const DecoderSetup setup = make_setup(cfg, lc);
    const std::string param = cfg.get("sweep", "param").value_or("w_msg");
    const std::vector<SweepPoint> points = sweep_loss_run(
        setup, lc, param, cfg.get_double("sweep", "lo", 0.0),
        cfg.get_double("sweep", "hi", 1.0),
        static_cast<std::size_t>(cfg.get_int("sweep", "points", 11)),
        cfg.get_double("sweep", "snr", 3.0),
        static_cast<std::uint64_t>(cfg.get_int("sweep", "frames", 10000)),
        static_cast<std::uint64_t>(cfg.get_int("sweep", "seed", 11)), workers);
    std::ofstream out(out_path);
    if (!out) throw ParamError("cannot open output file: " + out_path);
    write_sweep_csv(out, cfg, lc, param, points);
    std::printf("%zu grid points written to %s\n", points.size(),
                out_path.c_str());
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
    CLI::App app{"weighted belief-propagation decoding lab"};
    app.require_subcommand(1);

    std::vector<std::string> bm_pos;
    bool bm_oc = false;
    std::string bm_out = "matrix.alist";
    CLI::App* bm = app.add_subcommand("build-matrix",
                                      "construct or re-serialize a PC matrix");
    bm->add_option("spec", bm_pos, "'rm R M' or 'alist PATH'")->expected(-1);
    bm->add_flag("--oc", bm_oc, "emit all minimum-weight dual codewords");
    bm->add_option("--out", bm_out, "output alist path");

    std::string tr_config, tr_ckpt = "checkpoint.kv", tr_log = "train_log.csv";
    unsigned tr_workers = 1;
    std::int64_t tr_seed = -1;
    CLI::App* tr = app.add_subcommand("train", "optimize decoder parameters");
    tr->add_option("--config", tr_config)->required();
    tr->add_option("--out-checkpoint", tr_ckpt);
    tr->add_option("--out-log", tr_log);
    tr->add_option("--workers", tr_workers);
    tr->add_option("--seed", tr_seed);

    std::string ev_config, ev_ckpt, ev_out = "ber.csv";
    unsigned ev_workers = 1;
    std::int64_t ev_seed = -1;
    CLI::App* ev = app.add_subcommand("evaluate", "Monte Carlo BER sweep");
    ev->add_option("--config", ev_config)->required();
    ev->add_option("--checkpoint", ev_ckpt);
    ev->add_option("--out", ev_out);
    ev->add_option("--workers", ev_workers);
    ev->add_option("--seed", ev_seed);

    std::string sw_config, sw_out = "sweep.csv";
    unsigned sw_workers = 1;
    std::int64_t sw_seed = -1;
    CLI::App* sw = app.add_subcommand("sweep-loss",
                                      "loss landscape over one parameter");
    sw->add_option("--config", sw_config)->required();
    sw->add_option("--out", sw_out);
    sw->add_option("--workers", sw_workers);
    sw->add_option("--seed", sw_seed);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (bm->parsed()) return cmd_build_matrix(bm_pos, bm_oc, bm_out);
        if (tr->parsed())
            return cmd_train(tr_config, tr_ckpt, tr_log, tr_workers, tr_seed);
        if (ev->parsed())
            return cmd_evaluate(ev_config, ev_ckpt, ev_out, ev_workers, ev_seed);
        if (sw->parsed())
            return cmd_sweep_loss(sw_config, sw_out, sw_workers, sw_seed);
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

}  // namespace wbplab
