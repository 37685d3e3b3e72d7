#include "wbplab/rrd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>

#include "wbplab/errors.hpp"
#include "wbplab/gf2codes.hpp"

namespace wbplab {

Permutation Permutation::identity(std::size_t n) {
    Permutation p;
    p.map.resize(n);
    std::iota(p.map.begin(), p.map.end(), 0u);
    return p;
}

bool Permutation::is_valid() const {
    std::vector<std::uint32_t> sorted = map;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        if (sorted[i] != i) return false;
    return true;
}

Permutation Permutation::inverse() const {
    Permutation inv;
    inv.map.resize(map.size());
    for (std::uint32_t i = 0; i < map.size(); ++i) inv.map[map[i]] = i;
    return inv;
}

Permutation Permutation::compose(const Permutation& first,
                                 const Permutation& second) {
    Permutation out;
    out.map.resize(first.map.size());
    // y = apply(first, x), z = apply(second, y): z[i] = x[first[second[i]]].
    for (std::size_t i = 0; i < out.map.size(); ++i)
        out.map[i] = first.map[second.map[i]];
    return out;
}

void write_permutation(std::ostream& out, const Permutation& p) {
    for (std::size_t i = 0; i < p.map.size(); ++i)
        out << (i ? " " : "") << p.map[i];
    out << "\n";
}

Permutation sample_rm_affine(unsigned m, RngStream& rng) {
    const std::size_t n = 1ull << m;
    // Uniform invertible A by rejection, uniform b.
    BitMatrix a(m, m);
    while (true) {
        for (unsigned r = 0; r < m; ++r) {
            const std::uint64_t bits = rng.next_u64();
            for (unsigned c = 0; c < m; ++c) a.set(r, c, (bits >> c) & 1);
        }
        if (gf2_rank(a) == m) break;
    }
    const std::uint64_t b = rng.next_u64() & (n - 1);

    Permutation p;
    p.map.resize(n);
    for (std::size_t u = 0; u < n; ++u) {
        std::uint64_t image = b;
        for (unsigned r = 0; r < m; ++r) {
            unsigned bit = 0;
            for (unsigned c = 0; c < m; ++c)
                bit ^= a.get(r, c) & ((u >> c) & 1);
            image ^= static_cast<std::uint64_t>(bit) << r;
        }
        p.map[u] = static_cast<std::uint32_t>(image);
    }
    return p;
}

Permutation sample_cyclic_frobenius(std::size_t n, RngStream& rng) {
    if (n % 2 == 0)
        throw ParamError("cyclic/Frobenius sampling requires odd length");
    // Multiplicative order of 2 mod n.
    std::size_t ord = 1;
    for (std::size_t pow2 = 2 % n; pow2 != 1; pow2 = pow2 * 2 % n) ++ord;
    const std::size_t shift = rng.next_below(n);
    const std::size_t j = rng.next_below(ord);
    std::size_t mult = 1;
    for (std::size_t i = 0; i < j; ++i) mult = mult * 2 % n;

    Permutation p;
    p.map.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        p.map[i] = static_cast<std::uint32_t>((mult * i + shift) % n);
    return p;
}

Permutation sample_aut(const AutSampler& sampler, RngStream& rng) {
    switch (sampler.family) {
        case AutFamily::RmAffine:
            return sample_rm_affine(static_cast<unsigned>(sampler.parameter), rng);
        case AutFamily::CyclicFrobenius:
            return sample_cyclic_frobenius(sampler.parameter, rng);
    }
    throw ParamError("unknown automorphism family");
}

void RrdConfig::validate(const DecoderConfig& cfg) const {
    if (t_in == 0 || t_out == 0)
        throw ParamError("RRD iteration counts must be positive");
    if (!(beta >= 0.0 && beta <= 1.0))
        throw ParamError("mixing factor must lie in [0,1]");
    if (cfg.iterations != total_iterations())
        throw ParamError("decoder iteration count must equal t_in * t_out");
}

DecoderTrace rrd_decode(const TannerGraph& g, const WeightModel& weights,
                        const DecoderConfig& cfg, const RrdConfig& rrd,
                        const AutSampler& sampler, std::span<const double> ell,
                        RngStream perm_rng, const DecodeOptions& options,
                        DecoderWorkspace* ws,
                        std::vector<Permutation>* perms_out) {
    rrd.validate(cfg);
    if (ell.size() != g.n_vars)
        throw ParamError("channel LLR length does not match graph");

    DecoderConfig stage_cfg = cfg;
    stage_cfg.iterations = rrd.t_in;

    Permutation cumulative = Permutation::identity(g.n_vars);
    std::vector<double> m_prev(ell.begin(), ell.end());  // m^(0) = ell
    std::vector<double> mix(g.n_vars);

    DecoderTrace trace;
    for (std::size_t tau = 0; tau < rrd.t_out; ++tau) {
        // ell re-expressed in the frame of the previous stage.
        const std::vector<double> ell_frame = cumulative.apply(ell);
        for (std::size_t v = 0; v < g.n_vars; ++v)
            mix[v] = rrd.beta * ell_frame[v] + (1.0 - rrd.beta) * m_prev[v];

        const Permutation pi = sample_aut(sampler, perm_rng);
        if (perms_out) perms_out->push_back(pi);
        cumulative = Permutation::compose(cumulative, pi);
        const std::vector<double> stage_in = pi.apply(mix);

        DecodeOptions stage_opts;
        stage_opts.record_marginals = options.record_marginals;
        stage_opts.record_messages = options.record_messages;
        stage_opts.iteration_offset = tau * rrd.t_in;
        const DecoderTrace stage =
            decode(g, weights, stage_cfg, stage_in, stage_opts, ws);

        const Permutation back = cumulative.inverse();
        if (options.record_marginals) {
            for (std::size_t s = 0; s < stage.marginals.size(); ++s) {
                trace.marginals.push_back(back.apply(stage.marginals[s]));
                trace.soft.push_back(back.apply(stage.soft[s]));
            }
        } else if (tau + 1 == rrd.t_out) {
            trace.marginals.push_back(back.apply(stage.marginals.back()));
            trace.soft.push_back(back.apply(stage.soft.back()));
        }
        if (options.record_messages) {
            for (std::size_t s = 0; s < stage.lam.size(); ++s) {
                trace.lam.push_back(stage.lam[s]);
                trace.lam_hat.push_back(stage.lam_hat[s]);
            }
        }
        m_prev = stage.marginals.back();
    }
    trace.hard = hard_decision(trace.marginals.back());
    return trace;
}

}  // namespace wbplab
