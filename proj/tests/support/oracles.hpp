#pragma once

// Brute-force oracles for small codes: exact bitwise MAP LLRs, exhaustive
// maximum-likelihood decoding, and codebook weight enumeration.

#include <cmath>
#include <cstdint>
#include <vector>

#include "wbplab/gf2codes.hpp"

namespace oracle {

inline std::vector<std::vector<std::uint8_t>> all_codewords(
    const wbplab::Code& code) {
    std::vector<std::vector<std::uint8_t>> words;
    const std::size_t total = 1ull << code.k;
    for (std::size_t msg = 0; msg < total; ++msg) {
        std::vector<std::uint8_t> bits(code.k);
        for (std::size_t i = 0; i < code.k; ++i) bits[i] = (msg >> i) & 1;
        words.push_back(wbplab::encode(code, bits));
    }
    return words;
}

// Exact bitwise MAP LLRs given channel LLRs ell (positive favors 0):
// log sum_{x in C, x_v=0} w(x) - log sum_{x in C, x_v=1} w(x) with
// w(x) = exp(-sum_{u: x_u=1} ell_u), evaluated with log-sum-exp.
inline std::vector<double> map_llrs(const wbplab::Code& code,
                                    const std::vector<double>& ell) {
    const auto words = all_codewords(code);
    std::vector<double> scores(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        double s = 0.0;
        for (std::size_t v = 0; v < code.n; ++v)
            if (words[i][v]) s -= ell[v];
        scores[i] = s;
    }
    auto logsumexp = [&](int bit, std::size_t v) {
        double mx = -HUGE_VAL;
        for (std::size_t i = 0; i < words.size(); ++i)
            if (words[i][v] == bit && scores[i] > mx) mx = scores[i];
        double acc = 0.0;
        for (std::size_t i = 0; i < words.size(); ++i)
            if (words[i][v] == bit) acc += std::exp(scores[i] - mx);
        return mx + std::log(acc);
    };
    std::vector<double> out(code.n);
    for (std::size_t v = 0; v < code.n; ++v)
        out[v] = logsumexp(0, v) - logsumexp(1, v);
    return out;
}

// Exhaustive ML by maximum correlation; ties keep the earliest codeword in
// message-counting order.
inline std::vector<std::uint8_t> ml_decode(const wbplab::Code& code,
                                           const std::vector<double>& ell) {
    const auto words = all_codewords(code);
    double best = -HUGE_VAL;
    std::size_t best_i = 0;
    for (std::size_t i = 0; i < words.size(); ++i) {
        double corr = 0.0;
        for (std::size_t v = 0; v < code.n; ++v)
            corr += words[i][v] ? -ell[v] : ell[v];
        if (corr > best) {
            best = corr;
            best_i = i;
        }
    }
    return words[best_i];
}

// Minimum nonzero Hamming weight over the row space of a generator.
inline std::size_t min_codeword_weight(const wbplab::Code& code) {
    const auto words = all_codewords(code);
    std::size_t best = SIZE_MAX;
    for (const auto& w : words) {
        std::size_t weight = 0;
        for (const std::uint8_t b : w) weight += b;
        if (weight > 0 && weight < best) best = weight;
    }
    return best;
}

// Systematic Hamming(7,4) generator [I | P].
inline wbplab::Code hamming74() {
    wbplab::BitMatrix g(4, 7);
    const int rows[4][7] = {{1, 0, 0, 0, 1, 1, 0},
                            {0, 1, 0, 0, 1, 0, 1},
                            {0, 0, 1, 0, 0, 1, 1},
                            {0, 0, 0, 1, 1, 1, 1}};
    for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 7; ++c) g.set(r, c, rows[r][c]);
    return wbplab::code_from_generator(g);
}

// (n, n-1) single parity check code.
inline wbplab::Code spc(std::size_t n) {
    wbplab::BitMatrix g(n - 1, n);
    for (std::size_t r = 0; r + 1 < n; ++r) {
        g.set(r, r, true);
        g.set(r, n - 1, true);
    }
    return wbplab::code_from_generator(g);
}

}  // namespace oracle
