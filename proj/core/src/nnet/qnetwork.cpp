#include "ceqr/nnet/qnetwork.hpp"

#include <random>

#include "ceqr/errors.hpp"
#include "ceqr/nnet/evidential_head.hpp"

namespace ceqr::nnet {

void QNetworkConfig::validate() const {
  if (height == 0 || width == 0 || channels == 0) {
    throw ConfigError("qnetwork: observation extents must be positive");
  }
  if (num_actions == 0) throw ConfigError("qnetwork: num_actions must be positive");
  if (num_quantiles < 2) throw ConfigError("qnetwork: num_quantiles must exceed 1");
  if (filters == 0) throw ConfigError("qnetwork: filters must be positive");
  if (kernel % 2 == 0) throw ConfigError("qnetwork: kernel must be odd");
}

QNetwork::QNetwork(QNetworkConfig config)
    : config_((config.validate(), config)),
      conv_("conv", config_.channels, config_.filters, config_.kernel),
      action_head_("action_head", config_.feature_dim(), config_.action_outputs()),
      evidential_head_("evidential_head", config_.feature_dim(),
                       config_.evidential_outputs()) {
  std::mt19937_64 rng(config_.init_seed);
  conv_.init_he_uniform(rng);
  action_head_.init_he_uniform(rng);
  evidential_head_.init_he_uniform(rng);
}

QNetworkOutput QNetwork::forward(const Tensor& states, Heads heads) {
  const auto& c = config_;
  Tensor batch;
  if (states.shape() == Shape{c.height, c.width, c.channels}) {
    batch = states.reshaped({1, c.height, c.width, c.channels});
  } else if (states.rank() == 4 && states.dim(1) == c.height &&
             states.dim(2) == c.width && states.dim(3) == c.channels) {
    batch = states;
  } else {
    throw ConfigError("qnetwork: state shape " + shape_to_string(states.shape()) +
                      " does not match configured [H, W, O] = " +
                      shape_to_string({c.height, c.width, c.channels}));
  }
  const std::size_t b = batch.dim(0);

  Tensor features = relu_.forward(conv_.forward(batch)).reshaped({b, c.feature_dim()});
  QNetworkOutput out;
  out.quantiles = action_head_.forward(features).reshaped({b, c.num_actions, c.num_quantiles});
  if (heads == Heads::both) {
    Tensor raw = evidential_head_.forward(features);
    out.evidential = Tensor({b, 4, c.num_actions, 2, c.num_quantiles});
    transform_evidential(raw.data(), out.evidential.data(), c.num_actions * 2 * c.num_quantiles);
    evidential_raw_ = std::move(raw);
  } else {
    evidential_raw_.reset();
  }
  cached_batch_ = b;
  cached_both_ = heads == Heads::both;
  return out;
}

void QNetwork::backward(const Tensor& grad_quantiles, const Tensor& grad_evidential) {
  if (cached_batch_ == 0) throw StateError("qnetwork: backward before forward");
  const auto& c = config_;
  const std::size_t b = cached_batch_;
  if (grad_quantiles.size() != b * c.action_outputs()) {
    throw ShapeError("qnetwork: action gradient has " +
                     std::to_string(grad_quantiles.size()) + " values");
  }
  Tensor grad_features =
      action_head_.backward(grad_quantiles.reshaped({b, c.action_outputs()}));

  if (!grad_evidential.empty()) {
    if (!cached_both_) {
      throw StateError("qnetwork: evidential gradient without evidential forward");
    }
    if (grad_evidential.size() != b * c.evidential_outputs()) {
      throw ShapeError("qnetwork: evidential gradient has " +
                       std::to_string(grad_evidential.size()) + " values");
    }
    Tensor grad_raw({b, c.evidential_outputs()});
    transform_evidential_backward(evidential_raw_->data(), grad_evidential.data(),
                                  grad_raw.data(), c.num_actions * 2 * c.num_quantiles);
    Tensor from_evidential = evidential_head_.backward(grad_raw);
    auto g = grad_features.data();
    const auto e = from_evidential.data();
    for (std::size_t i = 0; i < g.size(); ++i) g[i] += e[i];
  }

  Tensor grad_conv =
      relu_.backward(grad_features.reshaped({b, c.height, c.width, c.filters}));
  conv_.backward(grad_conv);
}

std::vector<Parameter*> QNetwork::parameters() {
  std::vector<Parameter*> params;
  for (auto* p : conv_.parameters()) params.push_back(p);
  for (auto* p : action_head_.parameters()) params.push_back(p);
  for (auto* p : evidential_head_.parameters()) params.push_back(p);
  return params;
}

std::vector<const Parameter*> QNetwork::parameters() const {
  auto* self = const_cast<QNetwork*>(this);
  std::vector<const Parameter*> params;
  for (auto* p : self->parameters()) params.push_back(p);
  return params;
}

void QNetwork::zero_grad() {
  for (auto* p : parameters()) p->value.zero_grad();
}

void QNetwork::copy_parameters_from(const QNetwork& other) {
  if (other.config_.feature_dim() != config_.feature_dim() ||
      other.config_.action_outputs() != config_.action_outputs() ||
      other.config_.evidential_outputs() != config_.evidential_outputs() ||
      other.config_.channels != config_.channels) {
    throw ConfigError("qnetwork: cannot copy parameters between different shapes");
  }
  auto dst = parameters();
  auto src = other.parameters();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    auto to = dst[i]->value.data();
    const auto from = src[i]->value.data();
    std::copy(from.begin(), from.end(), to.begin());
  }
}

}  // namespace ceqr::nnet
