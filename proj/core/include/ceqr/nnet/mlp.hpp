#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ceqr/nnet/layers.hpp"
#include "ceqr/nnet/tensor.hpp"

namespace ceqr::nnet {

/// Dense network: Linear -> ReLU -> ... -> Linear, no activation on the
/// output layer.
class Mlp {
 public:
  Mlp(std::string name, std::vector<std::size_t> widths, std::uint64_t init_seed);

  std::size_t in_features() const { return widths_.front(); }
  std::size_t out_features() const { return widths_.back(); }
  std::size_t parameter_count() const;

  Tensor forward(const Tensor& input);
  Tensor backward(const Tensor& grad_output);

  std::vector<Parameter*> parameters();
  void zero_grad();

  /// Smallest |pre-activation| seen by any ReLU in the last forward pass;
  /// finite-difference probes closer than this cross a kink.
  double relu_margin() const noexcept { return relu_margin_; }

 private:
  std::vector<std::size_t> widths_;
  std::vector<Linear> layers_;
  std::vector<Relu> activations_;
  double relu_margin_ = 0.0;
};

}  // namespace ceqr::nnet
