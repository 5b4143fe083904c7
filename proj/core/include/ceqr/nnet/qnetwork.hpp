#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "ceqr/nnet/layers.hpp"
#include "ceqr/nnet/tensor.hpp"

namespace ceqr::nnet {

struct QNetworkConfig {
  std::size_t height = 10;
  std::size_t width = 10;
  std::size_t channels = 4;
  std::size_t num_actions = 6;
  std::size_t num_quantiles = 50;
  std::size_t filters = 16;
  std::size_t kernel = 3;
  std::uint64_t init_seed = 0;

  std::size_t feature_dim() const { return height * width * filters; }
  std::size_t action_outputs() const { return num_actions * num_quantiles; }
  /// 4 fields x A actions x 2 percentile levels x N quantiles.
  std::size_t evidential_outputs() const { return 4 * num_actions * 2 * num_quantiles; }
  void validate() const;
};

struct QNetworkOutput {
  Tensor quantiles;   ///< [B, A, N]
  Tensor evidential;  ///< [B, 4, A, 2, N], v/alpha/beta already made positive
};

enum class Heads { both, action_only };

/// Single same-padded convolution (16 filters, ReLU) feeding two linear
/// heads: action quantiles and evidential NIG parameters per percentile level.
class QNetwork {
 public:
  explicit QNetwork(QNetworkConfig config);

  const QNetworkConfig& config() const noexcept { return config_; }

  /// Accepts a single [H, W, O] state or a [B, H, W, O] batch.
  QNetworkOutput forward(const Tensor& states, Heads heads = Heads::both);

  /// Backpropagates gradients taken with respect to the transformed outputs of
  /// the last forward pass. Parameter gradients accumulate across calls.
  void backward(const Tensor& grad_quantiles, const Tensor& grad_evidential);

  std::vector<Parameter*> parameters();
  std::vector<const Parameter*> parameters() const;
  void zero_grad();
  /// Hard copy of every parameter value (gradients untouched).
  void copy_parameters_from(const QNetwork& other);

 private:
  QNetworkConfig config_;
  Conv2dSame conv_;
  Relu relu_;
  Linear action_head_;
  Linear evidential_head_;
  std::optional<Tensor> evidential_raw_;
  std::size_t cached_batch_ = 0;
  bool cached_both_ = false;
};

}  // namespace ceqr::nnet
