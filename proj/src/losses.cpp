#include "wbplab/losses.hpp"

#include <algorithm>
#include <cmath>

#include "wbplab/errors.hpp"

namespace wbplab {

std::string loss_tag(LossKind kind) {
    switch (kind) {
        case LossKind::BinaryCrossEntropy: return "ce";
        case LossKind::NegSoftSuccess: return "nss";
        case LossKind::SoftBer: return "soft-ber";
    }
    return "soft-ber";
}

LossKind loss_from_tag(const std::string& tag) {
    if (tag == "ce") return LossKind::BinaryCrossEntropy;
    if (tag == "nss") return LossKind::NegSoftSuccess;
    if (tag == "soft-ber") return LossKind::SoftBer;
    throw ParamError("unknown loss '" + tag + "' (expected ce, nss, soft-ber)");
}

double bit_loss(LossKind kind, int a, double b) {
    switch (kind) {
        case LossKind::BinaryCrossEntropy: {
            const double p = std::clamp(b, kProbEps, 1.0 - kProbEps);
            return a ? -std::log(p) : -std::log(1.0 - p);
        }
        case LossKind::NegSoftSuccess:
            return a ? -b : -(1.0 - b);
        case LossKind::SoftBer:
            return a ? 1.0 - b : b;
    }
    return 0.0;
}

double bit_loss_derivative(LossKind kind, int a, double b) {
    switch (kind) {
        case LossKind::BinaryCrossEntropy: {
            if (b < kProbEps || b > 1.0 - kProbEps) return 0.0;  // clamp flat
            return a ? -1.0 / b : 1.0 / (1.0 - b);
        }
        case LossKind::NegSoftSuccess:
            return a ? -1.0 : 1.0;
        case LossKind::SoftBer:
            return a ? -1.0 : 1.0;
    }
    return 0.0;
}

double codeword_loss(LossKind kind, std::span<const std::uint8_t> x,
                     std::span<const double> o) {
    if (x.size() != o.size())
        throw ParamError("codeword_loss: length mismatch");
    double acc = 0.0;
    for (std::size_t v = 0; v < x.size(); ++v)
        acc += bit_loss(kind, x[v], o[v]);
    return acc / static_cast<double>(x.size());
}

std::vector<double> multi_loss_weights(double eta, std::size_t t_count) {
    if (t_count == 0) throw ParamError("multi_loss: empty trace");
    if (!(eta >= 0.0 && eta <= 1.0))
        throw ParamError("discount factor must lie in [0,1]");
    std::vector<double> w(t_count);
    double total = 0.0;
    for (std::size_t t = 0; t < t_count; ++t) {
        // std::pow(0,0) = 1, so eta = 0 keeps exactly the final term.
        w[t] = std::pow(eta, static_cast<double>(t_count - 1 - t));
        total += w[t];
    }
    for (double& x : w) x /= total;
    return w;
}

double multi_loss(LossKind kind, double eta, std::span<const std::uint8_t> x,
                  const std::vector<std::vector<double>>& soft_per_iteration) {
    const std::vector<double> w = multi_loss_weights(eta, soft_per_iteration.size());
    double acc = 0.0;
    for (std::size_t t = 0; t < soft_per_iteration.size(); ++t)
        acc += w[t] * codeword_loss(kind, x, soft_per_iteration[t]);
    return acc;
}

}  // namespace wbplab
