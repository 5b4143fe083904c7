#include "ceqr/nnet/evidential_head.hpp"

#include <algorithm>

#include "ceqr/errors.hpp"
#include "ceqr/nnet/activations.hpp"

namespace ceqr::nnet {

double nig_transform(NigField field, double raw) {
  switch (field) {
    case NigField::gamma:
      return raw;
    case NigField::alpha:
      return 1.0 + std::max(softplus(raw), kMinEvidence);
    case NigField::v:
    case NigField::beta:
      return std::max(softplus(raw), kMinEvidence);
  }
  return raw;
}

double nig_transform_derivative(NigField field, double raw) {
  if (field == NigField::gamma) return 1.0;
  return softplus(raw) > kMinEvidence ? softplus_derivative(raw) : 0.0;
}

namespace {

void check_layout(std::size_t a, std::size_t b, std::size_t block) {
  if (a != b || block == 0 || a % (kNigFields * block) != 0) {
    throw ShapeError("evidential head buffer does not match [samples, 4, block]");
  }
}

NigField field_of(std::size_t flat, std::size_t block) {
  return static_cast<NigField>((flat / block) % kNigFields);
}

}  // namespace

void transform_evidential(std::span<const double> raw, std::span<double> out,
                          std::size_t block) {
  check_layout(raw.size(), out.size(), block);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    out[i] = nig_transform(field_of(i, block), raw[i]);
  }
}

void transform_evidential_backward(std::span<const double> raw,
                                   std::span<const double> grad_transformed,
                                   std::span<double> grad_raw,
                                   std::size_t block) {
  check_layout(raw.size(), grad_transformed.size(), block);
  check_layout(raw.size(), grad_raw.size(), block);
  for (std::size_t i = 0; i < raw.size(); ++i) {
    grad_raw[i] =
        grad_transformed[i] * nig_transform_derivative(field_of(i, block), raw[i]);
  }
}

}  // namespace ceqr::nnet
