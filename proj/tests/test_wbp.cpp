#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "support/oracles.hpp"
#include "support/reference_bp.hpp"
#include "wbplab/errors.hpp"
#include "wbplab/rng.hpp"
#include "wbplab/rrd.hpp"
#include "wbplab/wbp.hpp"

using namespace wbplab;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// H with a degree-3 variable (v0) and a degree-3 check (c2):
//   [[1,1,0],[1,0,1],[1,1,1]]
TannerGraph kernel_graph() {
    BitMatrix h(3, 3);
    h.set(0, 0, true);
    h.set(0, 1, true);
    h.set(1, 0, true);
    h.set(1, 2, true);
    h.set(2, 0, true);
    h.set(2, 1, true);
    h.set(2, 2, true);
    return build_graph(h);
}

std::vector<double> random_llrs(std::size_t n, RngStream& rng, double scale) {
    std::vector<double> out(n);
    for (double& x : out) x = scale * rng.next_gaussian();
    return out;
}

}  // namespace

TEST_CASE("channel_llr") {
    CHECK(channel_llr(std::vector<double>{0.5}, 0.5, 1.0)[0] ==
          doctest::Approx(1.0));
    CHECK(channel_llr(std::vector<double>{0.0}, 0.7, 3.0)[0] == 0.0);
    const double rho = std::pow(10.0, 0.3);
    CHECK(channel_llr(std::vector<double>{1.0}, 0.5, rho)[0] ==
          doctest::Approx(2.0 * rho).epsilon(1e-12));
    CHECK(channel_llr(std::vector<double>{1.0}, 0.5, rho)[0] ==
          doctest::Approx(3.9905246).epsilon(1e-6));
    CHECK_THROWS_AS(channel_llr(std::vector<double>{1.0}, 0.5, 0.0), ParamError);
}

TEST_CASE("vn_update") {
    const TannerGraph g = kernel_graph();
    const std::size_t ne = g.n_edges();
    std::vector<double> we(ne, 1.0), wv(g.n_vars, 1.0);
    std::vector<double> lam_hat(ne, 0.0), lam_pre(ne, 0.0);
    const std::vector<double> ell{1.0, -0.5, 2.0};

    SUBCASE("zero incoming messages reproduce the channel LLRs") {
        vn_update(g, we, wv, ell, lam_hat, lam_pre);
        for (std::size_t e = 0; e < ne; ++e)
            CHECK(lam_pre[e] == ell[g.edges[e].v]);
    }
    SUBCASE("degree-3 extrinsic sum") {
        // var 0 edges are 0 (c0), 2 (c1), 4 (c2)
        lam_hat[2] = 2.0;
        lam_hat[4] = -1.0;
        vn_update(g, we, wv, ell, lam_hat, lam_pre);
        CHECK(lam_pre[0] == doctest::Approx(2.0));
    }
    SUBCASE("degree-1 variable has an empty extrinsic sum") {
        BitMatrix h(1, 2);
        h.set(0, 0, true);
        h.set(0, 1, true);
        const TannerGraph g2 = build_graph(h);
        std::vector<double> wv2{0.5, 1.0}, we2(2, 1.0);
        std::vector<double> lh(2, 3.0), lp(2, 0.0);
        const std::vector<double> ell2{4.0, 1.0};
        vn_update(g2, we2, wv2, ell2, lh, lp);
        CHECK(lp[0] == doctest::Approx(0.5 * 4.0));
    }
}

TEST_CASE("cn_update") {
    const TannerGraph g = kernel_graph();
    const std::size_t ne = g.n_edges();
    std::vector<double> lam(ne, 0.0), out(ne, 0.0), scratch(ne, 0.0);

    SUBCASE("degree-2 check copies the other message") {
        lam[0] = 0.7;   // (v0,c0)
        lam[1] = -1.3;  // (v1,c0)
        cn_update(g, lam, out, scratch);
        CHECK(out[0] == doctest::Approx(-1.3).epsilon(1e-12));
        CHECK(out[1] == doctest::Approx(0.7).epsilon(1e-12));
    }
    SUBCASE("a zero input zeroes the other outputs of that check") {
        lam[4] = 0.0;  // (v0,c2)
        lam[5] = 2.0;
        lam[6] = -1.0;
        cn_update(g, lam, out, scratch);
        CHECK(out[5] == 0.0);
        CHECK(out[6] == 0.0);
    }
    SUBCASE("degree-3 check with incoming (2,2)") {
        lam[5] = 2.0;
        lam[6] = 2.0;
        cn_update(g, lam, out, scratch);
        const double expect = 2.0 * std::atanh(std::tanh(1.0) * std::tanh(1.0));
        CHECK(out[4] == expect);
        CHECK(out[4] == doctest::Approx(1.3250027).epsilon(1e-6));
    }
    SUBCASE("saturated messages without clipping overflow loudly") {
        for (double& x : lam) x = 1e3;
        CHECK_THROWS_AS(cn_update(g, lam, out, scratch), StructuralError);
    }
}

TEST_CASE("damp") {
    const std::vector<double> prev{2.0}, pre{4.0};
    std::vector<double> out(1);
    damp(prev, pre, 0.0, out);
    CHECK(out[0] == 4.0);
    damp(prev, pre, 1.0, out);
    CHECK(out[0] == 2.0);
    damp(prev, pre, 0.5, out);
    CHECK(out[0] == 3.0);
    CHECK_THROWS_AS(damp(prev, pre, 1.5, out), ParamError);
}

TEST_CASE("clip") {
    SUBCASE("bounds at l_max = 15") {
        std::vector<double> x{20.0, -20.0, 0.0, 3.0};
        clip_messages(x, 15.0);
        CHECK(x[0] == 15.0);
        CHECK(x[1] == -15.0);
        const double lo = -std::log(std::tanh(7.5));
        CHECK(x[2] == lo);
        CHECK(x[2] > 0.0);
        CHECK(x[2] == doctest::Approx(1.1e-6).epsilon(0.05));
        CHECK(x[3] == 3.0);
    }
    SUBCASE("small magnitudes are raised with their sign") {
        std::vector<double> x{1e-9, -1e-9};
        clip_messages(x, 15.0);
        const double lo = clip_lower_bound(15.0);
        CHECK(x[0] == lo);
        CHECK(x[1] == -lo);
    }
}

TEST_CASE("marginalize") {
    const TannerGraph g = kernel_graph();
    const std::size_t ne = g.n_edges();
    std::vector<double> lam_hat(ne, 0.0), m(g.n_vars, 0.0);
    const std::vector<double> ell{1.0, 5.0, -2.0};

    SUBCASE("zero messages give the channel LLRs") {
        std::vector<double> we(ne, 1.0), wv(g.n_vars, 1.0);
        marginalize(g, we, wv, ell, lam_hat, m);
        CHECK(m[0] == 1.0);
        CHECK(m[1] == 5.0);
        CHECK(m[2] == -2.0);
    }
    SUBCASE("full non-extrinsic sum") {
        std::vector<double> we(ne, 1.0), wv(g.n_vars, 1.0);
        // var 1 edges are 1 (c0) and 5 (c2)
        lam_hat[1] = 1.0;
        lam_hat[5] = -3.0;
        const std::vector<double> ell2{0.0, 1.0, 0.0};
        marginalize(g, we, wv, ell2, lam_hat, m);
        CHECK(m[1] == doctest::Approx(-1.0));
    }
    SUBCASE("scaled weights") {
        std::vector<double> we(ne, 0.5), wv(g.n_vars, 2.0);
        lam_hat[0] = 2.0;
        lam_hat[2] = 2.0;
        lam_hat[4] = 0.0;
        const std::vector<double> ell2{1.0, 0.0, 0.0};
        marginalize(g, we, wv, ell2, lam_hat, m);
        CHECK(m[0] == doctest::Approx(2.0 * 1.0 + 0.5 * (2.0 + 2.0)));
    }
}

TEST_CASE("hard_decision") {
    CHECK(hard_decision(std::vector<double>{1.0, -1.0, 0.0}) ==
          std::vector<std::uint8_t>{0, 1, 0});
    CHECK(hard_decision(std::vector<double>{0.3, 5.0}) ==
          std::vector<std::uint8_t>{0, 0});
    CHECK(hard_decision(std::vector<double>{-1e-300}) ==
          std::vector<std::uint8_t>{1});
}

TEST_CASE("decode on the (2,1) repetition code") {
    BitMatrix h(1, 2);
    h.set(0, 0, true);
    h.set(0, 1, true);
    const TannerGraph g = build_graph(h);
    const WeightModel w = WeightModel::ones(WeightVariant::RnnSS, 1, 2, 2);
    DecoderConfig cfg{1, 0.0, 15.0};
    const DecoderTrace trace = decode(g, w, cfg, std::vector<double>{2.0, 3.0});
    CHECK(trace.marginals.back()[0] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(trace.marginals.back()[1] == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(trace.hard == std::vector<std::uint8_t>{0, 0});
}

TEST_CASE("decode with strong positive LLRs returns the zero word") {
    const Code code = oracle::hamming74();
    const TannerGraph g = build_graph(code.pcm("std"));
    const WeightModel w =
        WeightModel::ones(WeightVariant::RnnSS, 5, g.n_edges(), g.n_vars);
    const DecoderTrace trace = decode(g, w, DecoderConfig{5, 0.0, 15.0},
                                      std::vector<double>(7, 100.0));
    CHECK(trace.hard == std::vector<std::uint8_t>(7, 0));
}

TEST_CASE("gamma = 1 freezes the messages at zero") {
    const TannerGraph g = kernel_graph();
    const WeightModel w =
        WeightModel::ones(WeightVariant::RnnSS, 3, g.n_edges(), g.n_vars);
    const std::vector<double> ell{1.5, -2.0, 0.75};
    DecodeOptions opt;
    opt.record_marginals = true;
    const DecoderTrace trace = decode(g, w, DecoderConfig{3, 1.0, 15.0}, ell, opt);
    for (const auto& m : trace.marginals)
        for (std::size_t v = 0; v < 3; ++v) CHECK(m[v] == ell[v]);
}

TEST_CASE("standard BP matches the textbook reference bit-exactly") {
    const Code code = oracle::hamming74();
    const TannerGraph g = build_graph(code.pcm("std"));
    const WeightModel w =
        WeightModel::ones(WeightVariant::RnnSS, 5, g.n_edges(), g.n_vars);
    RngStream rng = RngStream::keyed(99, 0);
    DecodeOptions opt;
    opt.record_marginals = true;
    for (int trial = 0; trial < 30; ++trial) {
        const std::vector<double> ell = random_llrs(7, rng, 3.0);
        const DecoderTrace mine = decode(g, w, DecoderConfig{5, 0.0, 15.0}, ell, opt);
        const refbp::Result ref = refbp::sum_product(code.pcm("std"), ell, 5, 15.0);
        REQUIRE(mine.marginals.size() == ref.marginals.size());
        for (std::size_t t = 0; t < 5; ++t)
            for (std::size_t v = 0; v < 7; ++v)
                CHECK(mine.marginals[t][v] == ref.marginals[t][v]);
        CHECK(mine.hard == ref.hard);
    }
}

TEST_CASE("tree marginals equal exact MAP LLRs") {
    const Code code = oracle::spc(4);
    const TannerGraph g = build_graph(code.pcm("std"));
    const WeightModel w =
        WeightModel::ones(WeightVariant::RnnSS, 1, g.n_edges(), g.n_vars);
    RngStream rng = RngStream::keyed(5, 0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::vector<double> ell = random_llrs(4, rng, 2.0);
        const DecoderTrace trace =
            decode(g, w, DecoderConfig{1, 0.0, kInf}, ell);
        const std::vector<double> map = oracle::map_llrs(code, ell);
        for (std::size_t v = 0; v < 4; ++v)
            CHECK(trace.marginals.back()[v] ==
                  doctest::Approx(map[v]).epsilon(1e-9));
    }
}

TEST_CASE("sign symmetry of the decode map") {
    const Code code = oracle::hamming74();
    const TannerGraph g = build_graph(code.pcm("std"));
    const WeightModel w =
        WeightModel::ones(WeightVariant::RnnSS, 4, g.n_edges(), g.n_vars);
    const DecoderConfig cfg{4, 0.25, 15.0};
    RngStream rng = RngStream::keyed(17, 0);
    for (int trial = 0; trial < 25; ++trial) {
        const std::vector<double> ell = random_llrs(7, rng, 2.5);
        std::vector<double> neg(7);
        for (std::size_t v = 0; v < 7; ++v) neg[v] = -ell[v];
        const auto pos_m = decode(g, w, cfg, ell).marginals.back();
        const auto neg_m = decode(g, w, cfg, neg).marginals.back();
        for (std::size_t v = 0; v < 7; ++v)
            CHECK(neg_m[v] == doctest::Approx(-pos_m[v]).epsilon(1e-12));
    }
}

TEST_CASE("automorphism equivariance on the overcomplete rm(32,16) matrix") {
    const Code code = code_from_generator(rm_generator(2, 5));
    const BitMatrix oc = enumerate_min_weight_dual(code);
    const TannerGraph g = build_graph(oc);
    WeightModel w = WeightModel::ones(WeightVariant::RnnSS, 3, g.n_edges(), g.n_vars);
    w.edge_w[0] = 0.4;
    w.chan_w[0] = 1.3;
    const DecoderConfig cfg{3, 0.1, 15.0};
    RngStream rng = RngStream::keyed(31, 0);
    for (int trial = 0; trial < 5; ++trial) {
        const std::vector<double> ell = random_llrs(32, rng, 2.0);
        RngStream prng = rng.split(trial);
        const Permutation pi = sample_rm_affine(5, prng);
        const auto direct = decode(g, w, cfg, pi.apply(ell)).marginals.back();
        const auto indirect = pi.apply(decode(g, w, cfg, ell).marginals.back());
        for (std::size_t v = 0; v < 32; ++v)
            CHECK(direct[v] == doctest::Approx(indirect[v]).epsilon(1e-9));
    }
}

TEST_CASE("FW with broadcast scalars reproduces RNN-SS decode") {
    const Code code = oracle::hamming74();
    const TannerGraph g = build_graph(code.pcm("std"));
    WeightModel ss = WeightModel::ones(WeightVariant::RnnSS, 3, g.n_edges(), g.n_vars);
    ss.edge_w[0] = 0.7;
    ss.chan_w[0] = 1.2;
    WeightModel fw = WeightModel::ones(WeightVariant::FW, 3, g.n_edges(), g.n_vars);
    for (double& x : fw.edge_w) x = 0.7;
    for (double& x : fw.chan_w) x = 1.2;
    const DecoderConfig cfg{3, 0.3, 15.0};
    RngStream rng = RngStream::keyed(8, 0);
    const std::vector<double> ell = random_llrs(7, rng, 2.0);
    const auto a = decode(g, ss, cfg, ell).marginals.back();
    const auto b = decode(g, fw, cfg, ell).marginals.back();
    for (std::size_t v = 0; v < 7; ++v) CHECK(a[v] == b[v]);
}

TEST_CASE("soft outputs are 1 - sigmoid(m) and hard follows the final sign") {
    const TannerGraph g = kernel_graph();
    const WeightModel w =
        WeightModel::ones(WeightVariant::RnnSS, 2, g.n_edges(), g.n_vars);
    DecodeOptions opt;
    opt.record_marginals = true;
    const DecoderTrace trace = decode(g, w, DecoderConfig{2, 0.0, 15.0},
                                      std::vector<double>{0.5, -1.0, 2.0}, opt);
    for (std::size_t t = 0; t < trace.marginals.size(); ++t)
        for (std::size_t v = 0; v < 3; ++v) {
            const double m = trace.marginals[t][v];
            CHECK(trace.soft[t][v] ==
                  doctest::Approx(1.0 - 1.0 / (1.0 + std::exp(-m))));
        }
    for (std::size_t v = 0; v < 3; ++v)
        CHECK(trace.hard[v] == (trace.marginals.back()[v] < 0.0 ? 1 : 0));
}

TEST_CASE("weight model serialization round trip with hash guard") {
    const Code code = oracle::hamming74();
    const TannerGraph g = build_graph(code.pcm("std"));
    WeightModel w = WeightModel::ones(WeightVariant::SS, 4, g.n_edges(), g.n_vars);
    for (std::size_t t = 0; t < 4; ++t) {
        w.edge_w[t] = 0.1 * static_cast<double>(t + 1);
        w.chan_w[t] = 1.0 - 0.05 * static_cast<double>(t);
    }
    const DecoderConfig cfg{4, 0.375, 12.0};
    const std::uint64_t hash = matrix_hash(code.pcm("std"));

    KvDoc doc;
    weights_to_doc(doc, w, cfg, hash);
    const KvDoc reparsed = KvDoc::parse_string(doc.serialize_string());

    WeightModel w2;
    DecoderConfig cfg2;
    weights_from_doc(reparsed, w2, cfg2, hash);
    CHECK(w2.variant == w.variant);
    CHECK(w2.edge_w == w.edge_w);
    CHECK(w2.chan_w == w.chan_w);
    CHECK(cfg2.gamma == cfg.gamma);
    CHECK(cfg2.clip_max == cfg.clip_max);

    CHECK_THROWS_AS(weights_from_doc(reparsed, w2, cfg2, hash + 1),
                    StructuralError);
}
