#pragma once

#include <cstddef>
#include <string>

#include "ceqr/losses.hpp"

namespace ceqr::agent {

enum class OptimizationMode {
  joint,        ///< one Adam step on L_Z + L_EL
  alternating,  ///< L_Z on even optimization steps, L_EL on odd ones
};

std::string to_string(OptimizationMode mode);
OptimizationMode parse_optimization_mode(const std::string& text);

/// Defaults follow the published hyperparameter table; lambda_ep is
/// task-specific there and defaults to the largest listed value.
struct AgentConfig {
  std::size_t num_quantiles = 50;
  double gamma_discount = 0.99;
  double lambda_ep = 0.01;
  double lambda_al = 0.0;
  std::size_t batch_size = 32;
  std::size_t target_sync_period = 1000;
  std::size_t replay_capacity = 100000;
  std::size_t replay_start = 5000;
  std::size_t update_frequency = 1;
  double learning_rate = 1e-4;
  double adam_epsilon = 1e-8;
  std::size_t conv_filters = 16;
  std::size_t conv_kernel = 3;
  losses::LossWeights loss;
  OptimizationMode mode = OptimizationMode::joint;

  void validate() const;
};

}  // namespace ceqr::agent
