#pragma once

#include <cstddef>
#include <random>
#include <span>
#include <vector>

#include "ceqr/evidential.hpp"
#include "ceqr/nnet/qnetwork.hpp"

namespace ceqr::agent {

struct ActionDecision {
  std::size_t action = 0;
  std::size_t greedy_action = 0;  ///< argmax of quantile means
  std::vector<double> means;
  std::vector<double> psi_ep;
  std::vector<double> psi_al;
  std::vector<double> sample;  ///< Thompson draw the action was taken from
};

/// Thompson sampling over actions: S ~ N(M - lambda_al * psi_al,
/// diag(lambda_ep * psi_ep)), action = argmax S. Ties go to the lowest index.
/// `quantiles` is the [A, N] action output for one state. Throws
/// DecisionError on non-finite inputs.
ActionDecision select_action(std::span<const double> quantiles,
                             const evidential::NIGQuantileSet& nig, double lambda_ep,
                             double lambda_al, std::mt19937_64& rng);

/// Runs the network on a single [H, W, O] state and selects an action.
ActionDecision select_action(nnet::QNetwork& net, const nnet::Tensor& state, double lambda_ep,
                             double lambda_al, std::mt19937_64& rng);

/// Distributional Bellman target for one transition given the target
/// network's [A, N] quantiles at the next state: reward everywhere when done,
/// otherwise reward + discount * quantiles of the action with the largest mean.
std::vector<double> bellman_target(std::span<const double> next_quantiles,
                                   std::size_t num_actions, double reward, bool done,
                                   double discount);

/// Same, evaluating the target network on `next_state`.
std::vector<double> bellman_target(nnet::QNetwork& target_net, double reward,
                                   const nnet::Tensor& next_state, bool done, double discount);

}  // namespace ceqr::agent
