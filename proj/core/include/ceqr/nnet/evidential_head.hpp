#pragma once

#include <cstddef>
#include <span>

namespace ceqr::nnet {

/// Order of the four evidential parameter planes in a head output.
enum class NigField : std::size_t { gamma = 0, v = 1, alpha = 2, beta = 3 };

inline constexpr std::size_t kNigFields = 4;

/// Floor on softplus outputs. Without it softplus underflows to 0 (and
/// 1 + softplus rounds to 1) for very negative inputs.
inline constexpr double kMinEvidence = 1e-8;

/// gamma is unconstrained; v, beta = softplus(raw); alpha = 1 + softplus(raw),
/// with softplus floored at kMinEvidence (zero gradient below the floor).
double nig_transform(NigField field, double raw);
double nig_transform_derivative(NigField field, double raw);

/// Applies the positivity transform to a flat buffer laid out as
/// [samples, 4, block]: each sample holds four consecutive planes of `block`
/// values in gamma, v, alpha, beta order.
void transform_evidential(std::span<const double> raw, std::span<double> out,
                          std::size_t block);

/// Chains d loss / d transformed back to d loss / d raw, same layout.
void transform_evidential_backward(std::span<const double> raw,
                                   std::span<const double> grad_transformed,
                                   std::span<double> grad_raw,
                                   std::size_t block);

}  // namespace ceqr::nnet
