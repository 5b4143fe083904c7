#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ceqr/nnet/tensor.hpp"

namespace ceqr::nnet {

/// Fully connected layer y = x W^T + b over a [batch, in] input.
class Linear {
 public:
  Linear() = default;
  Linear(std::string name, std::size_t in_features, std::size_t out_features);

  std::size_t in_features() const noexcept { return in_; }
  std::size_t out_features() const noexcept { return out_; }

  /// Uniform fan-in initialization U(-sqrt(6/in), sqrt(6/in)), zero bias.
  void init_he_uniform(std::mt19937_64& rng);

  Tensor forward(const Tensor& input);
  /// Accumulates parameter gradients and returns d loss / d input.
  Tensor backward(const Tensor& grad_output);

  Parameter& weight() noexcept { return weight_; }
  Parameter& bias() noexcept { return bias_; }
  const Parameter& weight() const noexcept { return weight_; }
  const Parameter& bias() const noexcept { return bias_; }
  std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }

  void clear_cache() { input_.reset(); }

 private:
  std::size_t in_ = 0;
  std::size_t out_ = 0;
  Parameter weight_;  // [out, in]
  Parameter bias_;    // [out]
  std::optional<Tensor> input_;
};

/// Stride-1 square convolution with zero "same" padding over a channels-last
/// [batch, height, width, channels] input.
class Conv2dSame {
 public:
  Conv2dSame() = default;
  Conv2dSame(std::string name, std::size_t in_channels, std::size_t filters,
             std::size_t kernel);

  std::size_t in_channels() const noexcept { return in_channels_; }
  std::size_t filters() const noexcept { return filters_; }
  std::size_t kernel() const noexcept { return kernel_; }

  void init_he_uniform(std::mt19937_64& rng);

  Tensor forward(const Tensor& input);
  Tensor backward(const Tensor& grad_output);

  Parameter& weight() noexcept { return weight_; }
  Parameter& bias() noexcept { return bias_; }
  std::vector<Parameter*> parameters() { return {&weight_, &bias_}; }

  void clear_cache() { patches_.reset(); }

 private:
  std::size_t in_channels_ = 0;
  std::size_t filters_ = 0;
  std::size_t kernel_ = 0;
  Parameter weight_;  // [filters, kernel, kernel, in_channels]
  Parameter bias_;    // [filters]
  Shape input_shape_;
  std::optional<Buffer> patches_;  // im2col, [B*H*W, k*k*C]
};

/// Elementwise max(0, x).
class Relu {
 public:
  Tensor forward(const Tensor& input);
  Tensor backward(const Tensor& grad_output) const;
  void clear_cache() { mask_.reset(); }

 private:
  std::optional<std::vector<bool>> mask_;
  Shape shape_;
};

}  // namespace ceqr::nnet
