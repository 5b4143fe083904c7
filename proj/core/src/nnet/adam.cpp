#include "ceqr/nnet/adam.hpp"

#include <cmath>

#include "ceqr/errors.hpp"

namespace ceqr::nnet {

void AdamConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ConfigError("adam: learning_rate must be positive");
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("adam: beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adam: beta2 must be in [0, 1)");
  if (!(epsilon > 0.0)) throw ConfigError("adam: epsilon must be positive");
}

Adam::Adam(AdamConfig config) : config_(config) { config_.validate(); }

void Adam::step(std::span<Parameter* const> params) {
  for (const Parameter* p : params) {
    if (!p->value.has_grad()) continue;
    for (double g : p->value.grad()) {
      if (!std::isfinite(g)) {
        throw TrainingError("adam: non-finite gradient in parameter '" + p->name + "'");
      }
    }
  }

  if (state_.first_moment.empty()) {
    for (const Parameter* p : params) {
      state_.first_moment.emplace_back(p->value.size(), 0.0);
      state_.second_moment.emplace_back(p->value.size(), 0.0);
    }
  }
  if (state_.first_moment.size() != params.size()) {
    throw ShapeError("adam: parameter list does not match optimizer state");
  }

  ++state_.step;
  const double t = static_cast<double>(state_.step);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);

  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    auto& m = state_.first_moment[k];
    auto& v = state_.second_moment[k];
    if (m.size() != p.value.size()) {
      throw ShapeError("adam: moment buffer shape mismatch for '" + p.name + "'");
    }
    auto theta = p.value.data();
    const auto g = p.value.grad();
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      theta[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace ceqr::nnet
