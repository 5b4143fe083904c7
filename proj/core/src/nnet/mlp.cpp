#include "ceqr/nnet/mlp.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "ceqr/errors.hpp"

namespace ceqr::nnet {

Mlp::Mlp(std::string name, std::vector<std::size_t> widths, std::uint64_t init_seed)
    : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw ConfigError("mlp " + name + " needs at least two widths");
  std::mt19937_64 rng(init_seed);
  for (std::size_t i = 0; i + 1 < widths_.size(); ++i) {
    layers_.emplace_back(name + ".fc" + std::to_string(i), widths_[i], widths_[i + 1]);
    layers_.back().init_he_uniform(rng);
  }
  activations_.resize(layers_.size() - 1);
}

std::size_t Mlp::parameter_count() const {
  std::size_t count = 0;
  for (std::size_t i = 0; i + 1 < widths_.size(); ++i) {
    count += widths_[i] * widths_[i + 1] + widths_[i + 1];
  }
  return count;
}

Tensor Mlp::forward(const Tensor& input) {
  Tensor x = input;
  relu_margin_ = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    x = layers_[i].forward(x);
    if (i < activations_.size()) {
      for (double v : x.data()) relu_margin_ = std::min(relu_margin_, std::abs(v));
      x = activations_[i].forward(x);
    }
  }
  return x;
}

Tensor Mlp::backward(const Tensor& grad_output) {
  Tensor g = grad_output;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    if (i < activations_.size()) g = activations_[i].backward(g);
    g = layers_[i].backward(g);
  }
  return g;
}

std::vector<Parameter*> Mlp::parameters() {
  std::vector<Parameter*> params;
  for (auto& layer : layers_) {
    for (auto* p : layer.parameters()) params.push_back(p);
  }
  return params;
}

void Mlp::zero_grad() {
  for (auto* p : parameters()) p->value.zero_grad();
}

}  // namespace ceqr::nnet
