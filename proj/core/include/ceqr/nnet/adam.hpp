#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ceqr/nnet/tensor.hpp"

namespace ceqr::nnet {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  void validate() const;
};

struct AdamState {
  std::uint64_t step = 0;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
};

/// Adam with bias correction. Moment buffers are bound to parameters by
/// position, so the parameter list must keep a stable order.
class Adam {
 public:
  explicit Adam(AdamConfig config = {});

  const AdamConfig& config() const noexcept { return config_; }
  const AdamState& state() const noexcept { return state_; }
  void set_state(AdamState state) { state_ = std::move(state); }

  /// Applies one update from each parameter's gradient buffer. Throws
  /// TrainingError naming the first parameter with a non-finite gradient;
  /// nothing is modified in that case.
  void step(std::span<Parameter* const> params);

 private:
  AdamConfig config_;
  AdamState state_;
};

}  // namespace ceqr::nnet
