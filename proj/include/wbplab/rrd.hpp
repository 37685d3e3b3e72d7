#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "wbplab/rng.hpp"
#include "wbplab/wbp.hpp"

namespace wbplab {

// Bijection on [n]; applying it to a vector x yields y with y[i] = x[map[i]].
struct Permutation {
    std::vector<std::uint32_t> map;

    static Permutation identity(std::size_t n);

    std::size_t size() const { return map.size(); }
    bool is_valid() const;

    Permutation inverse() const;
    // apply(compose(a, b), x) == apply(b, apply(a, x)).
    static Permutation compose(const Permutation& first,
                               const Permutation& second);

    template <typename T>
    std::vector<T> apply(std::span<const T> x) const {
        std::vector<T> y(map.size());
        for (std::size_t i = 0; i < map.size(); ++i) y[i] = x[map[i]];
        return y;
    }
    template <typename T>
    std::vector<T> apply(const std::vector<T>& x) const {
        return apply(std::span<const T>(x));
    }
};

void write_permutation(std::ostream& out, const Permutation& p);

// Automorphism families used by RRD:
//  - RmAffine: positions of RM(r,m) indexed by points of GF(2)^m in binary
//    counting order; permutations are u -> A u + b with invertible A.
//  - CyclicFrobenius: cyclic shift composed with the doubling map
//    i -> 2^j i + s mod n, valid for any binary cyclic code of odd length.
enum class AutFamily { RmAffine, CyclicFrobenius };

struct AutSampler {
    AutFamily family = AutFamily::RmAffine;
    // RmAffine: m (code length 2^m). CyclicFrobenius: n (odd code length).
    std::size_t parameter = 0;
};

Permutation sample_rm_affine(unsigned m, RngStream& rng);
Permutation sample_cyclic_frobenius(std::size_t n, RngStream& rng);
Permutation sample_aut(const AutSampler& sampler, RngStream& rng);

// T_out outer stages of T_in inner iterations each; mixing factor beta
// weights the original channel LLRs against the previous stage's output.
struct RrdConfig {
    std::size_t t_in = 2;
    std::size_t t_out = 30;
    double beta = 0.5;

    std::size_t total_iterations() const { return t_in * t_out; }
    void validate(const DecoderConfig& cfg) const;
};

// Cascaded decoding per stage tau:
//   input = permute_tau( beta * ell_frame + (1 - beta) * m_prev ),
// where ell_frame is the channel vector re-expressed in the current
// cumulative permutation frame and m_prev the previous stage's final
// marginals (m_prev = ell for the first stage). Messages reset to zero at
// every stage boundary; weights are indexed by global iteration. The trace
// is reported in transmission order.
DecoderTrace rrd_decode(const TannerGraph& g, const WeightModel& weights,
                        const DecoderConfig& cfg, const RrdConfig& rrd,
                        const AutSampler& sampler, std::span<const double> ell,
                        RngStream perm_rng, const DecodeOptions& options = {},
                        DecoderWorkspace* ws = nullptr,
                        std::vector<Permutation>* perms_out = nullptr);

}  // namespace wbplab
