#include "ceqr/nnet/layers.hpp"

#include <Eigen/Core>
#include <cmath>

#include "ceqr/errors.hpp"

namespace ceqr::nnet {
namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixMap = Eigen::Map<RowMatrix>;
using ConstMatrixMap = Eigen::Map<const RowMatrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

void fill_uniform(std::span<double> values, double bound,
                  std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& x : values) x = dist(rng);
}

}  // namespace

Linear::Linear(std::string name, std::size_t in_features,
               std::size_t out_features)
    : in_(in_features),
      out_(out_features),
      weight_{name + ".weight", Tensor({out_features, in_features})},
      bias_{name + ".bias", Tensor({out_features})} {
  if (in_ == 0 || out_ == 0) {
    throw ConfigError("linear layer " + name + " needs positive extents");
  }
}

void Linear::init_he_uniform(std::mt19937_64& rng) {
  fill_uniform(weight_.value.data(), std::sqrt(6.0 / static_cast<double>(in_)),
               rng);
  bias_.value.fill(0.0);
}

Tensor Linear::forward(const Tensor& input) {
  if (input.rank() != 2 || input.dim(1) != in_) {
    throw ShapeError("linear " + weight_.name + ": expected [B, " +
                     std::to_string(in_) + "], got " +
                     shape_to_string(input.shape()));
  }
  const auto batch = static_cast<Eigen::Index>(input.dim(0));
  Tensor output({input.dim(0), out_});
  ConstMatrixMap x(input.data().data(), batch, static_cast<Eigen::Index>(in_));
  ConstMatrixMap w(weight_.value.data().data(), static_cast<Eigen::Index>(out_),
                   static_cast<Eigen::Index>(in_));
  Eigen::Map<const Eigen::RowVectorXd> b(bias_.value.data().data(),
                                         static_cast<Eigen::Index>(out_));
  MatrixMap y(output.data().data(), batch, static_cast<Eigen::Index>(out_));
  y.noalias() = x * w.transpose();
  y.rowwise() += b;
  input_ = input;
  return output;
}

Tensor Linear::backward(const Tensor& grad_output) {
  if (!input_) throw StateError("linear " + weight_.name + ": backward before forward");
  const auto batch = static_cast<Eigen::Index>(input_->dim(0));
  if (grad_output.shape() != Shape{input_->dim(0), out_}) {
    throw ShapeError("linear " + weight_.name + ": gradient shape " +
                     shape_to_string(grad_output.shape()));
  }
  const auto in = static_cast<Eigen::Index>(in_);
  const auto out = static_cast<Eigen::Index>(out_);
  ConstMatrixMap g(grad_output.data().data(), batch, out);
  ConstMatrixMap x(input_->data().data(), batch, in);
  ConstMatrixMap w(weight_.value.data().data(), out, in);
  MatrixMap gw(weight_.value.grad().data(), out, in);
  Eigen::Map<Eigen::RowVectorXd> gb(bias_.value.grad().data(), out);
  gw.noalias() += g.transpose() * x;
  gb += g.colwise().sum();

  Tensor grad_input({input_->dim(0), in_});
  MatrixMap gx(grad_input.data().data(), batch, in);
  gx.noalias() = g * w;
  return grad_input;
}

Conv2dSame::Conv2dSame(std::string name, std::size_t in_channels,
                       std::size_t filters, std::size_t kernel)
    : in_channels_(in_channels),
      filters_(filters),
      kernel_(kernel),
      weight_{name + ".weight", Tensor({filters, kernel, kernel, in_channels})},
      bias_{name + ".bias", Tensor({filters})} {
  if (kernel % 2 == 0 || kernel == 0) {
    throw ConfigError("conv " + name + ": same padding needs an odd kernel");
  }
  if (in_channels == 0 || filters == 0) {
    throw ConfigError("conv " + name + " needs positive channel counts");
  }
}

void Conv2dSame::init_he_uniform(std::mt19937_64& rng) {
  const double fan_in = static_cast<double>(kernel_ * kernel_ * in_channels_);
  fill_uniform(weight_.value.data(), std::sqrt(6.0 / fan_in), rng);
  bias_.value.fill(0.0);
}

Tensor Conv2dSame::forward(const Tensor& input) {
  if (input.rank() != 4 || input.dim(3) != in_channels_) {
    throw ShapeError("conv " + weight_.name + ": expected [B, H, W, " +
                     std::to_string(in_channels_) + "], got " +
                     shape_to_string(input.shape()));
  }
  const std::size_t batch = input.dim(0);
  const std::size_t height = input.dim(1);
  const std::size_t width = input.dim(2);
  const std::size_t channels = in_channels_;
  const std::size_t patch = kernel_ * kernel_ * channels;
  const auto half = static_cast<std::ptrdiff_t>(kernel_ / 2);

  Buffer patches(batch * height * width * patch, 0.0);
  const auto in_data = input.data();
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        double* row = &patches[((b * height + r) * width + c) * patch];
        for (std::size_t kr = 0; kr < kernel_; ++kr) {
          const auto sr = static_cast<std::ptrdiff_t>(r + kr) - half;
          if (sr < 0 || sr >= static_cast<std::ptrdiff_t>(height)) continue;
          for (std::size_t kc = 0; kc < kernel_; ++kc) {
            const auto sc = static_cast<std::ptrdiff_t>(c + kc) - half;
            if (sc < 0 || sc >= static_cast<std::ptrdiff_t>(width)) continue;
            const double* src =
                &in_data[((b * height + static_cast<std::size_t>(sr)) * width +
                          static_cast<std::size_t>(sc)) *
                         channels];
            std::copy(src, src + channels, row + (kr * kernel_ + kc) * channels);
          }
        }
      }
    }
  }

  const auto rows = static_cast<Eigen::Index>(batch * height * width);
  const auto cols = static_cast<Eigen::Index>(patch);
  const auto f = static_cast<Eigen::Index>(filters_);
  Tensor output({batch, height, width, filters_});
  ConstMatrixMap p(patches.data(), rows, cols);
  ConstMatrixMap w(weight_.value.data().data(), f, cols);
  Eigen::Map<const Eigen::RowVectorXd> bias(bias_.value.data().data(), f);
  MatrixMap y(output.data().data(), rows, f);
  y.noalias() = p * w.transpose();
  y.rowwise() += bias;

  input_shape_ = input.shape();
  patches_ = std::move(patches);
  return output;
}

Tensor Conv2dSame::backward(const Tensor& grad_output) {
  if (!patches_) throw StateError("conv " + weight_.name + ": backward before forward");
  const std::size_t batch = input_shape_[0];
  const std::size_t height = input_shape_[1];
  const std::size_t width = input_shape_[2];
  const std::size_t channels = in_channels_;
  if (grad_output.shape() != Shape{batch, height, width, filters_}) {
    throw ShapeError("conv " + weight_.name + ": gradient shape " +
                     shape_to_string(grad_output.shape()));
  }
  const std::size_t patch = kernel_ * kernel_ * channels;
  const auto rows = static_cast<Eigen::Index>(batch * height * width);
  const auto cols = static_cast<Eigen::Index>(patch);
  const auto f = static_cast<Eigen::Index>(filters_);

  ConstMatrixMap g(grad_output.data().data(), rows, f);
  ConstMatrixMap p(patches_->data(), rows, cols);
  ConstMatrixMap w(weight_.value.data().data(), f, cols);
  MatrixMap gw(weight_.value.grad().data(), f, cols);
  Eigen::Map<Eigen::RowVectorXd> gb(bias_.value.grad().data(), f);
  gw.noalias() += g.transpose() * p;
  gb += g.colwise().sum();

  RowMatrix grad_patches = g * w;
  Tensor grad_input(input_shape_);
  auto gin = grad_input.data();
  const auto half = static_cast<std::ptrdiff_t>(kernel_ / 2);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        const double* row =
            grad_patches.data() + ((b * height + r) * width + c) * patch;
        for (std::size_t kr = 0; kr < kernel_; ++kr) {
          const auto sr = static_cast<std::ptrdiff_t>(r + kr) - half;
          if (sr < 0 || sr >= static_cast<std::ptrdiff_t>(height)) continue;
          for (std::size_t kc = 0; kc < kernel_; ++kc) {
            const auto sc = static_cast<std::ptrdiff_t>(c + kc) - half;
            if (sc < 0 || sc >= static_cast<std::ptrdiff_t>(width)) continue;
            double* dst =
                &gin[((b * height + static_cast<std::size_t>(sr)) * width +
                      static_cast<std::size_t>(sc)) *
                     channels];
            const double* src = row + (kr * kernel_ + kc) * channels;
            for (std::size_t ch = 0; ch < channels; ++ch) dst[ch] += src[ch];
          }
        }
      }
    }
  }
  return grad_input;
}

Tensor Relu::forward(const Tensor& input) {
  Tensor output(input.shape());
  std::vector<bool> mask(input.size());
  const auto x = input.data();
  auto y = output.data();
  for (std::size_t i = 0; i < x.size(); ++i) {
    mask[i] = x[i] > 0.0;
    y[i] = mask[i] ? x[i] : 0.0;
  }
  shape_ = input.shape();
  mask_ = std::move(mask);
  return output;
}

Tensor Relu::backward(const Tensor& grad_output) const {
  if (!mask_) throw StateError("relu: backward before forward");
  if (grad_output.shape() != shape_) {
    throw ShapeError("relu: gradient shape " +
                     shape_to_string(grad_output.shape()));
  }
  Tensor grad_input(shape_);
  const auto g = grad_output.data();
  auto out = grad_input.data();
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = (*mask_)[i] ? g[i] : 0.0;
  return grad_input;
}

}  // namespace ceqr::nnet
