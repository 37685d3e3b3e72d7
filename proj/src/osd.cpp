#include "wbplab/osd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wbplab/errors.hpp"

namespace wbplab {

namespace {

double correlation(std::span<const double> llr,
                   std::span<const std::uint64_t> word) {
    double acc = 0.0;
    for (std::size_t v = 0; v < llr.size(); ++v) {
        const bool bit = (word[v >> 6] >> (v & 63)) & 1;
        acc += bit ? -llr[v] : llr[v];
    }
    return acc;
}

}  // namespace

std::vector<std::uint8_t> osd_decode(const Code& code,
                                     std::span<const double> llr,
                                     const OsdConfig& cfg) {
    const std::size_t n = code.n, k = code.k;
    if (llr.size() != n) throw ParamError("osd_decode: LLR length != n");
    if (cfg.order > k) throw ParamError("osd_decode: order exceeds dimension");

    // Positions by reliability, most reliable first; ties keep index order.
    std::vector<std::uint32_t> by_reliability(n);
    std::iota(by_reliability.begin(), by_reliability.end(), 0u);
    std::stable_sort(by_reliability.begin(), by_reliability.end(),
                     [&](std::uint32_t a, std::uint32_t b) {
                         return std::fabs(llr[a]) > std::fabs(llr[b]);
                     });

    // Greedy elimination on a generator copy picks the most reliable basis:
    // a position is accepted if its column is independent of the ones
    // already chosen. After the loop, row basis_row[i] is the unique row
    // with a 1 at basis position i and 0 at every other basis position.
    BitMatrix work = code.generator;
    std::vector<std::uint32_t> basis_pos;
    std::vector<std::uint32_t> basis_row;
    std::vector<bool> row_used(k, false);
    basis_pos.reserve(k);
    for (std::uint32_t col : by_reliability) {
        if (basis_pos.size() == k) break;
        std::size_t pivot = k;
        for (std::size_t r = 0; r < k; ++r)
            if (!row_used[r] && work.get(r, col)) {
                pivot = r;
                break;
            }
        if (pivot == k) continue;  // dependent column
        for (std::size_t r = 0; r < k; ++r)
            if (r != pivot && work.get(r, col)) work.xor_rows(pivot, r);
        row_used[pivot] = true;
        basis_pos.push_back(col);
        basis_row.push_back(static_cast<std::uint32_t>(pivot));
    }
    if (basis_pos.size() != k)
        throw StructuralError("osd_decode: generator is rank deficient");

    // Base codeword agreeing with the hard decisions on the basis.
    const std::size_t words = work.words_per_row();
    std::vector<std::uint64_t> base(words, 0);
    for (std::size_t i = 0; i < k; ++i) {
        if (llr[basis_pos[i]] < 0.0) {
            auto row = work.row_words(basis_row[i]);
            for (std::size_t w = 0; w < words; ++w) base[w] ^= row[w];
        }
    }

    std::vector<std::uint64_t> best = base;
    double best_score = correlation(llr, base);
    std::vector<std::uint64_t> cand(words);

    // Flip patterns by ascending weight; ties keep the first candidate in
    // enumeration order (strict improvement only).
    std::vector<std::size_t> idx;
    auto try_pattern = [&](const std::vector<std::size_t>& flips) {
        cand = base;
        for (std::size_t i : flips) {
            auto row = work.row_words(basis_row[i]);
            for (std::size_t w = 0; w < words; ++w) cand[w] ^= row[w];
        }
        const double score = correlation(llr, cand);
        if (score > best_score) {
            best_score = score;
            best = cand;
        }
    };
    // Enumerate weight-w subsets of [k] in lexicographic order.
    for (unsigned weight = 1; weight <= cfg.order; ++weight) {
        idx.assign(weight, 0);
        std::iota(idx.begin(), idx.end(), std::size_t{0});
        while (true) {
            try_pattern(idx);
            std::size_t pos = weight;
            while (pos-- > 0) {
                if (idx[pos] != k - weight + pos) break;
                if (pos == 0) { pos = SIZE_MAX; break; }
            }
            if (pos == SIZE_MAX) break;
            ++idx[pos];
            for (std::size_t j = pos + 1; j < weight; ++j) idx[j] = idx[j - 1] + 1;
        }
    }

    std::vector<std::uint8_t> out(n);
    for (std::size_t v = 0; v < n; ++v) out[v] = (best[v >> 6] >> (v & 63)) & 1;
    return out;
}

}  // namespace wbplab
