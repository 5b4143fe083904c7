#include "ceqr/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include "ceqr/losses.hpp"
#include "ceqr/nnet/evidential_head.hpp"
#include "ceqr/nnet/mlp.hpp"
#include "ceqr/objectives.hpp"

namespace ceqr::gradcheck {
namespace {

using evidential::NIGParams;
using evidential::Percentile;
using losses::BatchView;
using nnet::NigField;
using nnet::Tensor;

constexpr std::size_t kInputs = 2;
constexpr std::size_t kMaxParameters = 100;
constexpr double kKinkMargin = 1e-3;
constexpr double kInf = std::numeric_limits<double>::infinity();

struct Evaluation {
  double value = 0.0;
  std::vector<double> grad_outputs;
  double margin = kInf;
};

using LossFn = std::function<Evaluation(const Tensor& outputs, bool want_grad)>;

struct Probe {
  std::string name;
  std::size_t outputs;
  std::size_t batch;
  std::function<LossFn(std::mt19937_64&)> draw;
};

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double normal(std::mt19937_64& rng, double sd) {
  return std::normal_distribution<double>(0.0, sd)(rng);
}

double huber_margin(double e, double kappa) {
  return std::min(std::abs(e), std::abs(std::abs(e) - kappa));
}

// Reads the 4 planes of `block` values at sample b of a raw head output and
// returns transformed values.
std::vector<double> transformed(const Tensor& outputs, std::size_t b, std::size_t block) {
  const std::size_t width = 4 * block;
  std::vector<double> out(width);
  nnet::transform_evidential(outputs.data().subspan(b * width, width), out, block);
  return out;
}

void chain_transform(const Tensor& outputs, std::size_t b, std::size_t block,
                     std::span<const double> grad_transformed, std::span<double> grad_outputs) {
  const std::size_t width = 4 * block;
  nnet::transform_evidential_backward(outputs.data().subspan(b * width, width), grad_transformed,
                                      grad_outputs.subspan(b * width, width), block);
}

Probe scalar_probe(std::string name, bool asymmetric) {
  return {std::move(name), 1, 4, [asymmetric](std::mt19937_64& rng) -> LossFn {
            std::vector<double> y(4);
            for (double& v : y) v = normal(rng, 2.0);
            const double kappa = uniform(rng, 0.5, 2.0);
            const double q = uniform(rng, 0.05, 0.95);
            return [=](const Tensor& out, bool want_grad) {
              Evaluation ev;
              if (want_grad) ev.grad_outputs.assign(out.size(), 0.0);
              const double inv_b = 1.0 / static_cast<double>(y.size());
              for (std::size_t b = 0; b < y.size(); ++b) {
                const double e = y[b] - out[b];
                ev.margin = std::min(ev.margin, huber_margin(e, kappa));
                if (asymmetric) {
                  ev.value += inv_b * losses::quantile_huber(e, q, kappa);
                  if (want_grad) ev.grad_outputs[b] = -inv_b * losses::quantile_huber_derivative(e, q, kappa);
                } else {
                  ev.value += inv_b * losses::huber(e, kappa);
                  if (want_grad) ev.grad_outputs[b] = -inv_b * losses::huber_derivative(e, kappa);
                }
              }
              return ev;
            };
          }};
}

Probe qr_probe() {
  constexpr std::size_t n = 4, batch = 3;
  return {"qr_loss", n, batch, [](std::mt19937_64& rng) -> LossFn {
            std::vector<double> targets(batch * n);
            for (double& v : targets) v = normal(rng, 1.5);
            const double kappa = uniform(rng, 0.5, 2.0);
            return [=](const Tensor& out, bool want_grad) {
              const auto levels = losses::QuantileLevels::midpoints(n);
              Evaluation ev;
              if (want_grad) ev.grad_outputs.assign(out.size(), 0.0);
              for (std::size_t b = 0; b < batch; ++b) {
                const auto theta = out.data().subspan(b * n, n);
                const auto y = std::span<const double>(targets).subspan(b * n, n);
                for (double t : theta) {
                  for (double yy : y) ev.margin = std::min(ev.margin, huber_margin(yy - t, kappa));
                }
                std::vector<double> g(n, 0.0);
                ev.value += losses::qr_loss(theta, y, levels.values(), kappa,
                                            want_grad ? std::span<double>(g) : std::span<double>{}) /
                            batch;
                if (want_grad) {
                  for (std::size_t i = 0; i < n; ++i) ev.grad_outputs[b * n + i] = g[i] / batch;
                }
              }
              return ev;
            };
          }};
}

enum class EvidentialTerm { reg, nll, full };

Probe evidential_probe(std::string name, EvidentialTerm term) {
  constexpr std::size_t batch = 3;
  return {std::move(name), 4, batch, [term](std::mt19937_64& rng) -> LossFn {
            std::vector<double> y(batch);
            for (double& v : y) v = normal(rng, 1.5);
            const double q = uniform(rng, 0.05, 0.95);
            const double lambda_reg = uniform(rng, 0.1, 1.0);
            return [=](const Tensor& out, bool want_grad) {
              Evaluation ev;
              if (want_grad) ev.grad_outputs.assign(out.size(), 0.0);
              for (std::size_t b = 0; b < batch; ++b) {
                const auto t = transformed(out, b, 1);
                const NIGParams g(t[0], t[1], t[2], t[3]);
                losses::NIGGrad grad;
                double grad_yhat = 0.0;
                double value = 0.0;
                switch (term) {
                  case EvidentialTerm::reg:
                    ev.margin = std::min(ev.margin, std::abs(y[b] - g.gamma()));
                    value = losses::evidential_reg(y[b], g.gamma(), q, g, &grad, &grad_yhat);
                    grad.gamma += grad_yhat;
                    break;
                  case EvidentialTerm::nll:
                    value = losses::evidential_nll(y[b], g, &grad);
                    break;
                  case EvidentialTerm::full:
                    ev.margin = std::min(ev.margin, std::abs(y[b] - g.gamma()));
                    value = losses::evidential_loss(y[b], q, g, lambda_reg, &grad);
                    break;
                }
                ev.value += value / batch;
                if (want_grad) {
                  const double gt[4] = {grad.gamma / batch, grad.v / batch, grad.alpha / batch,
                                        grad.beta / batch};
                  chain_transform(out, b, 1, gt, ev.grad_outputs);
                }
              }
              return ev;
            };
          }};
}

Probe calibration_probe() {
  constexpr std::size_t n = 4, batch = 5, atoms = 4;
  return {"calibration", n, batch, [](std::mt19937_64& rng) -> LossFn {
            std::vector<double> targets(batch * atoms);
            for (double& v : targets) v = normal(rng, 1.5);
            const double lambda_cal = uniform(rng, 0.0, 1.0);
            return [=](const Tensor& out, bool want_grad) {
              const auto levels = losses::QuantileLevels::midpoints(n);
              Evaluation ev;
              if (want_grad) ev.grad_outputs.assign(out.size(), 0.0);
              for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t i = 0; i < n; ++i) {
                  for (std::size_t j = 0; j < atoms; ++j) {
                    ev.margin = std::min(ev.margin, std::abs(targets[b * atoms + j] - out[b * n + i]));
                  }
                }
              }
              ev.value = losses::cal_loss(BatchView(out.data(), batch, n),
                                          BatchView(targets, batch, atoms), levels.values(),
                                          lambda_cal, ev.grad_outputs)
                             .value;
              return ev;
            };
          }};
}

// Bounds come from columns [0, n) and [n, 2n) of the output.
std::pair<std::vector<double>, std::vector<double>> split_bounds(const Tensor& out,
                                                                 std::size_t batch, std::size_t n) {
  std::vector<double> lo(batch * n), hi(batch * n);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      lo[b * n + i] = out[b * 2 * n + i];
      hi[b * n + i] = out[b * 2 * n + n + i];
    }
  }
  return {lo, hi};
}

double bound_margin(std::span<const double> lo, std::span<const double> hi,
                    std::span<const double> y) {
  double m = kInf;
  for (std::size_t k = 0; k < y.size(); ++k) {
    m = std::min({m, std::abs(y[k] - lo[k]), std::abs(y[k] - hi[k])});
  }
  return m;
}

Probe band_probe() {
  constexpr std::size_t n = 2, batch = 6;
  return {"band_calibration", 2 * n, batch, [](std::mt19937_64& rng) -> LossFn {
            std::vector<double> targets(batch * n);
            for (double& v : targets) v = normal(rng, 1.5);
            const double p = uniform(rng, 0.5, 0.95);
            const double lambda_cal = uniform(rng, 0.0, 1.0);
            return [=](const Tensor& out, bool want_grad) {
              auto [lo, hi] = split_bounds(out, batch, n);
              Evaluation ev;
              ev.margin = bound_margin(lo, hi, targets);
              std::vector<double> g_lo, g_hi;
              if (want_grad) {
                g_lo.assign(batch * n, 0.0);
                g_hi.assign(batch * n, 0.0);
              }
              ev.value = losses::band_cal_loss(BatchView(lo, batch, n), BatchView(hi, batch, n),
                                               BatchView(targets, batch, n), p, lambda_cal, g_lo,
                                               g_hi)
                             .value;
              if (want_grad) {
                ev.grad_outputs.assign(out.size(), 0.0);
                for (std::size_t b = 0; b < batch; ++b) {
                  for (std::size_t i = 0; i < n; ++i) {
                    ev.grad_outputs[b * 2 * n + i] = g_lo[b * n + i];
                    ev.grad_outputs[b * 2 * n + n + i] = g_hi[b * n + i];
                  }
                }
              }
              return ev;
            };
          }};
}

Probe interval_probe() {
  constexpr std::size_t n = 3, batch = 3;
  return {"interval", 2 * n, batch, [](std::mt19937_64& rng) -> LossFn {
            std::vector<double> targets(batch * n);
            for (double& v : targets) v = normal(rng, 1.5);
            const double q = uniform(rng, 0.05, 0.3);
            return [=](const Tensor& out, bool want_grad) {
              auto [lo, hi] = split_bounds(out, batch, n);
              Evaluation ev;
              ev.margin = bound_margin(lo, hi, targets);
              if (want_grad) ev.grad_outputs.assign(out.size(), 0.0);
              for (std::size_t b = 0; b < batch; ++b) {
                std::vector<double> g_lo(n, 0.0), g_hi(n, 0.0);
                const auto row = [&](const std::vector<double>& v) {
                  return std::span<const double>(v).subspan(b * n, n);
                };
                ev.value += losses::interval_loss(row(lo), row(hi), row(targets), q,
                                                  want_grad ? std::span<double>(g_lo) : std::span<double>{},
                                                  want_grad ? std::span<double>(g_hi) : std::span<double>{}) /
                            batch;
                if (want_grad) {
                  for (std::size_t i = 0; i < n; ++i) {
                    ev.grad_outputs[b * 2 * n + i] = g_lo[i] / batch;
                    ev.grad_outputs[b * 2 * n + n + i] = g_hi[i] / batch;
                  }
                }
              }
              return ev;
            };
          }};
}

Probe total_z_probe() {
  constexpr std::size_t n = 4, batch = 4;
  return {"total_z", n, batch, [](std::mt19937_64& rng) -> LossFn {
            std::vector<double> targets(batch * n);
            for (double& v : targets) v = normal(rng, 1.5);
            losses::LossWeights weights;
            weights.kappa = uniform(rng, 0.5, 2.0);
            weights.lambda_cal = uniform(rng, 0.0, 1.0);
            return [=](const Tensor& out, bool want_grad) {
              Evaluation ev;
              for (std::size_t b = 0; b < batch; ++b) {
                for (std::size_t i = 0; i < n; ++i) {
                  for (std::size_t j = 0; j < n; ++j) {
                    const double e = targets[b * n + j] - out[b * n + i];
                    ev.margin = std::min(ev.margin, huber_margin(e, weights.kappa));
                  }
                }
              }
              if (want_grad) ev.grad_outputs.assign(out.size(), 0.0);
              ev.value = objectives::z_loss(BatchView(out.data(), batch, n),
                                            BatchView(targets, batch, n),
                                            losses::QuantileLevels::midpoints(n), weights,
                                            ev.grad_outputs)
                             .total;
              return ev;
            };
          }};
}

Probe total_el_probe() {
  constexpr std::size_t n = 2, batch = 3;
  constexpr std::size_t block = 2 * n;  // one action, two levels
  return {"total_el", 4 * block, batch, [](std::mt19937_64& rng) -> LossFn {
            std::vector<double> targets(batch * n);
            for (double& v : targets) v = normal(rng, 1.5);
            losses::LossWeights weights;
            weights.lambda_reg = uniform(rng, 0.1, 1.0);
            weights.lambda_cal = uniform(rng, 0.0, 1.0);
            weights.coverage_p = uniform(rng, 0.5, 0.95);
            return [=](const Tensor& out, bool want_grad) {
              objectives::NigBatch params(batch, n);
              for (std::size_t b = 0; b < batch; ++b) {
                const auto t = transformed(out, b, block);
                for (std::size_t k = 0; k < block; ++k) {
                  const std::size_t idx = b * block + k;
                  params.gamma[idx] = t[k];
                  params.v[idx] = t[block + k];
                  params.alpha[idx] = t[2 * block + k];
                  params.beta[idx] = t[3 * block + k];
                }
              }
              Evaluation ev;
              const auto lo = params.gamma_plane(Percentile::p05);
              const auto hi = params.gamma_plane(Percentile::p95);
              ev.margin = bound_margin(lo, hi, targets);
              objectives::NigBatch grad(batch, n);
              ev.value = objectives::el_loss(params, BatchView(targets, batch, n), weights,
                                             want_grad ? &grad : nullptr)
                             .total;
              if (want_grad) {
                ev.grad_outputs.assign(out.size(), 0.0);
                std::vector<double> gt(4 * block);
                for (std::size_t b = 0; b < batch; ++b) {
                  for (std::size_t k = 0; k < block; ++k) {
                    const std::size_t idx = b * block + k;
                    gt[k] = grad.gamma[idx];
                    gt[block + k] = grad.v[idx];
                    gt[2 * block + k] = grad.alpha[idx];
                    gt[3 * block + k] = grad.beta[idx];
                  }
                  chain_transform(out, b, block, gt, ev.grad_outputs);
                }
              }
              return ev;
            };
          }};
}

std::vector<Probe> all_probes() {
  return {scalar_probe("huber", false),
          scalar_probe("quantile_huber", true),
          qr_probe(),
          evidential_probe("evidential_reg", EvidentialTerm::reg),
          evidential_probe("evidential_nll", EvidentialTerm::nll),
          evidential_probe("evidential_loss", EvidentialTerm::full),
          calibration_probe(),
          band_probe(),
          interval_probe(),
          total_z_probe(),
          total_el_probe()};
}

std::size_t hidden_width(std::size_t outputs) {
  // in*h + h + h*out + out <= kMaxParameters
  const std::size_t h = (kMaxParameters - outputs) / (kInputs + 1 + outputs);
  return std::min<std::size_t>(h, 8);
}

double run_trial(const Probe& probe, std::mt19937_64& rng, const Options& options,
                 std::size_t* parameter_count) {
  const std::size_t hidden = hidden_width(probe.outputs);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    nnet::Mlp net("probe", {kInputs, hidden, probe.outputs}, rng());
    Tensor input({probe.batch, kInputs});
    for (double& x : input.data()) x = normal(rng, 1.0);
    const LossFn loss = probe.draw(rng);

    Tensor out = net.forward(input);
    Evaluation ev = loss(out, true);
    if (std::min(ev.margin, net.relu_margin()) < kKinkMargin) continue;

    net.zero_grad();
    net.backward(Tensor(out.shape(), ev.grad_outputs));
    auto params = net.parameters();
    *parameter_count = net.parameter_count();

    double max_diff = 0.0;
    double scale = 0.0;
    for (auto* p : params) {
      auto values = p->value.data();
      const auto grads = p->value.grad();
      for (std::size_t k = 0; k < values.size(); ++k) {
        const double saved = values[k];
        values[k] = saved + options.step;
        const double plus = loss(net.forward(input), false).value;
        values[k] = saved - options.step;
        const double minus = loss(net.forward(input), false).value;
        values[k] = saved;
        const double numeric = (plus - minus) / (2.0 * options.step);
        const double analytic = grads[k] * (1.0 + options.corrupt);
        max_diff = std::max(max_diff, std::abs(analytic - numeric));
        scale = std::max({scale, std::abs(analytic), std::abs(numeric)});
      }
    }
    return scale > 0.0 ? max_diff / scale : max_diff;
  }
  throw std::runtime_error("gradcheck: could not draw a kink-free input for " + probe.name);
}

}  // namespace

std::vector<std::string> loss_names() {
  std::vector<std::string> names;
  for (const auto& p : all_probes()) names.push_back(p.name);
  return names;
}

std::vector<Row> run(const Options& options) {
  std::vector<Row> rows;
  std::mt19937_64 rng(options.seed);
  for (const auto& probe : all_probes()) {
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), probe.name) == options.only.end()) {
      continue;
    }
    Row row;
    row.loss = probe.name;
    for (std::size_t t = 0; t < options.trials; ++t) {
      row.max_relative_error =
          std::max(row.max_relative_error, run_trial(probe, rng, options, &row.parameters));
      ++row.trials;
    }
    row.passed = row.max_relative_error <= options.tolerance;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace ceqr::gradcheck
