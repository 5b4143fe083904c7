#include "ceqr/agent/action_selection.hpp"

#include <cmath>
#include <sstream>

#include "ceqr/errors.hpp"

namespace ceqr::agent {

namespace {

std::size_t argmax(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

std::vector<double> action_means(std::span<const double> quantiles, std::size_t num_actions) {
  const std::size_t n = quantiles.size() / num_actions;
  std::vector<double> means(num_actions, 0.0);
  for (std::size_t a = 0; a < num_actions; ++a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += quantiles[a * n + i];
    means[a] = sum / static_cast<double>(n);
  }
  return means;
}

}  // namespace

ActionDecision select_action(std::span<const double> quantiles,
                             const evidential::NIGQuantileSet& nig, double lambda_ep,
                             double lambda_al, std::mt19937_64& rng) {
  const std::size_t actions = nig.num_actions();
  if (quantiles.size() != actions * nig.num_quantiles()) {
    throw ShapeError("select_action: quantile block does not match evidential set");
  }
  for (std::size_t k = 0; k < quantiles.size(); ++k) {
    if (!std::isfinite(quantiles[k])) {
      std::ostringstream os;
      os << "select_action: non-finite action quantile at action " << k / nig.num_quantiles()
         << ", index " << k % nig.num_quantiles() << " (value " << quantiles[k] << ")";
      throw DecisionError(os.str());
    }
  }

  ActionDecision d;
  d.means = action_means(quantiles, actions);
  d.greedy_action = argmax(d.means);
  d.psi_ep.resize(actions);
  d.psi_al.resize(actions);
  d.sample.resize(actions);
  std::normal_distribution<double> standard(0.0, 1.0);
  for (std::size_t a = 0; a < actions; ++a) {
    const auto u = evidential::action_uncertainties(nig, a);
    if (!std::isfinite(u.epistemic) || !std::isfinite(u.aleatoric)) {
      std::ostringstream os;
      os << "select_action: non-finite uncertainty for action " << a << " (psi_ep "
         << u.epistemic << ", psi_al " << u.aleatoric << ")";
      throw DecisionError(os.str());
    }
    d.psi_ep[a] = u.epistemic;
    d.psi_al[a] = u.aleatoric;
    const double mean = d.means[a] - lambda_al * u.aleatoric;
    d.sample[a] = mean + std::sqrt(lambda_ep * u.epistemic) * standard(rng);
  }
  d.action = argmax(d.sample);
  return d;
}

ActionDecision select_action(nnet::QNetwork& net, const nnet::Tensor& state, double lambda_ep,
                             double lambda_al, std::mt19937_64& rng) {
  const auto out = net.forward(state);
  const auto& c = net.config();
  return select_action(out.quantiles.data().subspan(0, c.num_actions * c.num_quantiles),
                       evidential::NIGQuantileSet::from_output(out.evidential, 0), lambda_ep,
                       lambda_al, rng);
}

std::vector<double> bellman_target(std::span<const double> next_quantiles,
                                   std::size_t num_actions, double reward, bool done,
                                   double discount) {
  if (num_actions == 0 || next_quantiles.size() % num_actions != 0) {
    throw ShapeError("bellman_target: quantile block is not [A, N]");
  }
  const std::size_t n = next_quantiles.size() / num_actions;
  std::vector<double> target(n, reward);
  if (done) return target;
  const std::size_t best = argmax(action_means(next_quantiles, num_actions));
  for (std::size_t i = 0; i < n; ++i) target[i] = reward + discount * next_quantiles[best * n + i];
  return target;
}

std::vector<double> bellman_target(nnet::QNetwork& target_net, double reward,
                                   const nnet::Tensor& next_state, bool done, double discount) {
  const auto& c = target_net.config();
  if (done) return std::vector<double>(c.num_quantiles, reward);
  const auto out = target_net.forward(next_state, nnet::Heads::action_only);
  return bellman_target(out.quantiles.data(), c.num_actions, reward, done, discount);
}

}  // namespace ceqr::agent
