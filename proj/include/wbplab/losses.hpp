#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace wbplab {

// Bit-wise loss functions a -> b, where a is the transmitted bit and b the
// decoder's probability estimate that the bit is 1:
//   binary cross-entropy:  -log(b^a (1-b)^(1-a))
//   negative soft success: -b^a (1-b)^(1-a)
//   soft bit error:        (1-b)^a b^(1-a)
// The last one equals the bit-error indicator when b is hardened.
enum class LossKind { BinaryCrossEntropy, NegSoftSuccess, SoftBer };

std::string loss_tag(LossKind kind);          // "ce" | "nss" | "soft-ber"
LossKind loss_from_tag(const std::string& tag);

// Probabilities are clamped to [kProbEps, 1-kProbEps] before cross-entropy
// logs; marginals are unclipped so sigmoid outputs can saturate in floating
// point.
inline constexpr double kProbEps = 1e-12;

double bit_loss(LossKind kind, int a, double b);

// d bit_loss / d b. Zero on the cross-entropy clamp flats.
double bit_loss_derivative(LossKind kind, int a, double b);

// (1/N) sum_v bit_loss(x_v, o_v).
double codeword_loss(LossKind kind, std::span<const std::uint8_t> x,
                     std::span<const double> o);

// Discount weights eta^(T-t) / sum_t eta^(T-t) for t = 1..T (index 0 holds
// t = 1). eta = 0 selects the final iteration only.
std::vector<double> multi_loss_weights(double eta, std::size_t t_count);

// sum_t eta^(T-t) L(x, o^(t)) / sum_t eta^(T-t) over the recorded
// per-iteration soft outputs.
double multi_loss(LossKind kind, double eta, std::span<const std::uint8_t> x,
                  const std::vector<std::vector<double>>& soft_per_iteration);

}  // namespace wbplab
