#pragma once

// Textbook flooding sum-product decoder, written directly against the
// parity-check matrix with dense per-(check, variable) message tables.
// Deliberately independent of the library's edge-indexed decoder: it is the
// reference the standard-BP tests compare against bit for bit.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "wbplab/gf2codes.hpp"

namespace refbp {

struct Result {
    std::vector<std::vector<double>> marginals;  // per iteration
    std::vector<std::uint8_t> hard;
};

inline Result sum_product(const wbplab::BitMatrix& h,
                          const std::vector<double>& ell, std::size_t iterations,
                          double clip_max = 15.0) {
    const std::size_t m = h.rows(), n = h.cols();
    const bool clip_on = clip_max != std::numeric_limits<double>::infinity();
    const double lo = -std::log(std::tanh(clip_max / 2.0));

    std::vector<std::vector<double>> lam(m, std::vector<double>(n, 0.0));
    std::vector<std::vector<double>> lam_hat(m, std::vector<double>(n, 0.0));
    Result res;

    for (std::size_t t = 0; t < iterations; ++t) {
        // variable-to-check, extrinsic sum in ascending check order
        for (std::size_t c = 0; c < m; ++c)
            for (std::size_t v = 0; v < n; ++v) {
                if (!h.get(c, v)) continue;
                double acc = ell[v];
                for (std::size_t c2 = 0; c2 < m; ++c2)
                    if (c2 != c && h.get(c2, v)) acc += lam_hat[c2][v];
                if (clip_on) {
                    const double a = std::fabs(acc);
                    if (a < lo)
                        acc = std::signbit(acc) ? -lo : lo;
                    else if (a > clip_max)
                        acc = acc < 0 ? -clip_max : clip_max;
                }
                lam[c][v] = acc;
            }
        // check-to-variable, extrinsic product in ascending variable order
        for (std::size_t c = 0; c < m; ++c)
            for (std::size_t v = 0; v < n; ++v) {
                if (!h.get(c, v)) continue;
                double prod = 1.0;
                for (std::size_t v2 = 0; v2 < n; ++v2)
                    if (v2 != v && h.get(c, v2))
                        prod *= std::tanh(lam[c][v2] / 2.0);
                lam_hat[c][v] = 2.0 * std::atanh(prod);
            }
        // marginals, ascending check order
        std::vector<double> marg(n);
        for (std::size_t v = 0; v < n; ++v) {
            double acc = ell[v];
            for (std::size_t c = 0; c < m; ++c)
                if (h.get(c, v)) acc += lam_hat[c][v];
            marg[v] = acc;
        }
        res.marginals.push_back(std::move(marg));
    }
    res.hard.resize(n);
    for (std::size_t v = 0; v < n; ++v)
        res.hard[v] = res.marginals.back()[v] < 0.0 ? 1 : 0;
    return res;
}

}  // namespace refbp
