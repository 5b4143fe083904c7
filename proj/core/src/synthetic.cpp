#include "ceqr/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

#include "ceqr/errors.hpp"
#include "ceqr/evidential.hpp"
#include "ceqr/metrics.hpp"
#include "ceqr/nnet/adam.hpp"
#include "ceqr/nnet/evidential_head.hpp"
#include "ceqr/nnet/mlp.hpp"
#include "ceqr/objectives.hpp"

namespace ceqr::synthetic {

using evidential::Percentile;
using nnet::NigField;

double target_function(double x) {
  return std::sin(3.0 * x) * std::cos(2.0 * x) + 0.5 * std::exp(-x * x) + x * x - 0.1 * x;
}

double noise_variance(double x, double noise_scale) {
  return noise_scale * 1.5 * std::exp(-0.4 * std::abs(x));
}

void DataConfig::validate() const {
  if (!(train_lo < train_hi)) throw ConfigError("synthetic.train range: lo must be < hi");
  if (!(test_lo <= train_lo && train_hi <= test_hi)) {
    throw ConfigError("synthetic.test range: must contain the train range");
  }
  if (!(noise_scale >= 0.0) || !std::isfinite(noise_scale)) {
    throw ConfigError("synthetic.noise_scale: must be finite and >= 0");
  }
}

void ModelConfig::validate() const {
  if (hidden.empty()) throw ConfigError("synthetic.hidden: need at least one layer");
  for (auto w : hidden) {
    if (w == 0) throw ConfigError("synthetic.hidden: widths must be positive");
  }
  if (steps == 0) throw ConfigError("synthetic.steps: must be positive");
  if (batch_size == 0) throw ConfigError("synthetic.batch_size: must be positive");
  if (!(learning_rate > 0.0)) throw ConfigError("synthetic.learning_rate: must be > 0");
  if (history_every == 0) throw ConfigError("synthetic.history_every: must be positive");
  loss.validate();
}

Dataset generate(std::size_t n_train, std::size_t n_test, std::uint64_t seed,
                 const DataConfig& config) {
  if (n_train == 0 || n_test == 0) throw DomainError("generate: sample counts must be positive");
  config.validate();
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> standard(0.0, 1.0);
  Dataset d;
  d.config = config;
  const auto draw = [&](double lo, double hi, std::size_t n, std::vector<double>& xs,
                        std::vector<double>& ys) {
    std::uniform_real_distribution<double> ux(lo, hi);
    xs.resize(n);
    ys.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      xs[k] = ux(rng);
      ys[k] = target_function(xs[k]) +
              std::sqrt(noise_variance(xs[k], config.noise_scale)) * standard(rng);
    }
  };
  draw(config.train_lo, config.train_hi, n_train, d.train_x, d.train_y);
  draw(config.test_lo, config.test_hi, n_test, d.test_x, d.test_y);
  return d;
}

namespace {

// Raw output column for one field at one percentile level.
constexpr std::size_t column(NigField f, Percentile l) {
  return static_cast<std::size_t>(f) * 2 + static_cast<std::size_t>(l);
}
constexpr std::size_t kOutputs = 8;

struct Scaler {
  double x_mean = 0.0, x_scale = 1.0, y_mean = 0.0, y_scale = 1.0;
};

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev(const std::vector<double>& v, double m) {
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  const double sd = std::sqrt(s / static_cast<double>(v.size()));
  return sd > 0.0 ? sd : 1.0;
}

// Fills a NigBatch (N = 1) from raw network outputs.
objectives::NigBatch to_params(const nnet::Tensor& raw) {
  const std::size_t batch = raw.dim(0);
  objectives::NigBatch p(batch, 1);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t l = 0; l < 2; ++l) {
      const auto level = static_cast<Percentile>(l);
      const std::size_t k = p.index(b, level, 0);
      const auto r = [&](NigField f) { return raw[b * kOutputs + column(f, level)]; };
      p.gamma[k] = nnet::nig_transform(NigField::gamma, r(NigField::gamma));
      p.v[k] = nnet::nig_transform(NigField::v, r(NigField::v));
      p.alpha[k] = nnet::nig_transform(NigField::alpha, r(NigField::alpha));
      p.beta[k] = nnet::nig_transform(NigField::beta, r(NigField::beta));
    }
  }
  return p;
}

nnet::Tensor to_raw_grad(const nnet::Tensor& raw, const objectives::NigBatch& g) {
  nnet::Tensor out(raw.shape());
  for (std::size_t b = 0; b < g.batch; ++b) {
    for (std::size_t l = 0; l < 2; ++l) {
      const auto level = static_cast<Percentile>(l);
      const std::size_t k = g.index(b, level, 0);
      const auto set = [&](NigField f, double grad) {
        const std::size_t c = b * kOutputs + column(f, level);
        out[c] = grad * nnet::nig_transform_derivative(f, raw[c]);
      };
      set(NigField::gamma, g.gamma[k]);
      set(NigField::v, g.v[k]);
      set(NigField::alpha, g.alpha[k]);
      set(NigField::beta, g.beta[k]);
    }
  }
  return out;
}

nnet::Tensor column_input(const std::vector<double>& xs, const Scaler& s) {
  nnet::Tensor t({xs.size(), 1});
  for (std::size_t k = 0; k < xs.size(); ++k) t[k] = (xs[k] - s.x_mean) / s.x_scale;
  return t;
}

struct Prediction {
  double q05, q95, aleatoric, epistemic;
};

// Uncertainties are reported in original target units.
std::vector<Prediction> predict(nnet::Mlp& net, const std::vector<double>& xs, const Scaler& s) {
  const auto raw = net.forward(column_input(xs, s));
  const auto p = to_params(raw);
  std::vector<Prediction> out(xs.size());
  for (std::size_t k = 0; k < xs.size(); ++k) {
    std::vector<evidential::NIGParams> set{p.at(k, Percentile::p05, 0), p.at(k, Percentile::p95, 0)};
    const auto u = evidential::action_uncertainties(
        evidential::NIGQuantileSet(1, 1, std::move(set)), 0);
    out[k].q05 = p.gamma[p.index(k, Percentile::p05, 0)] * s.y_scale + s.y_mean;
    out[k].q95 = p.gamma[p.index(k, Percentile::p95, 0)] * s.y_scale + s.y_mean;
    out[k].aleatoric = u.aleatoric * s.y_scale;
    out[k].epistemic = u.epistemic * s.y_scale;
  }
  return out;
}

double band_coverage(const std::vector<double>& lo, const std::vector<double>& hi,
                     const std::vector<double>& y, double p) {
  if (y.empty()) return 0.0;
  const std::size_t n = y.size();
  return losses::band_cal_loss(losses::BatchView(lo, n, 1), losses::BatchView(hi, n, 1),
                               losses::BatchView(y, n, 1), p, 0.5)
      .coverage[0];
}

}  // namespace

Report fit_and_evaluate(const Dataset& data, const ModelConfig& config) {
  config.validate();
  if (data.train_x.empty() || data.train_x.size() != data.train_y.size() ||
      data.test_x.size() != data.test_y.size()) {
    throw DomainError("fit_and_evaluate: malformed dataset");
  }

  Scaler s;
  if (config.normalize) {
    s.x_mean = mean(data.train_x);
    s.x_scale = stddev(data.train_x, s.x_mean);
    s.y_mean = mean(data.train_y);
    s.y_scale = stddev(data.train_y, s.y_mean);
  }

  std::vector<std::size_t> widths{1};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(kOutputs);
  nnet::Mlp net("synthetic", widths, config.seed);
  nnet::AdamConfig ac;
  ac.learning_rate = config.learning_rate;
  nnet::Adam adam(ac);
  const auto params = net.parameters();

  std::mt19937_64 rng(config.seed ^ 0x5eedULL);
  const std::size_t n_train = data.train_x.size();
  const std::size_t batch = std::min(config.batch_size, n_train);
  std::uniform_int_distribution<std::size_t> pick(0, n_train - 1);
  std::vector<double> bx(batch), by(batch);

  Report report;
  for (std::size_t step = 0; step < config.steps; ++step) {
    for (std::size_t k = 0; k < batch; ++k) {
      const std::size_t j = pick(rng);
      bx[k] = data.train_x[j];
      by[k] = (data.train_y[j] - s.y_mean) / s.y_scale;
    }
    const auto raw = net.forward(column_input(bx, s));
    const auto nig = to_params(raw);
    objectives::NigBatch grad(batch, 1);
    const auto terms = objectives::el_loss(nig, losses::BatchView(by, batch, 1), config.loss, &grad);
    if (!std::isfinite(terms.total)) {
      std::ostringstream os;
      os << "synthetic: non-finite loss at step " << step;
      throw TrainingError(os.str());
    }
    report.final_loss = terms.total;
    net.zero_grad();
    net.backward(to_raw_grad(raw, grad));
    adam.step(params);

    if ((step + 1) % config.history_every == 0) {
      const auto pred = predict(net, data.train_x, s);
      double width = 0.0;
      for (const auto& p : pred) width += p.aleatoric;
      report.aleatoric_history.push_back(width / static_cast<double>(pred.size()));
    }
  }

  // Audit on the test split, sorted by x.
  std::vector<std::size_t> order(data.test_x.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return data.test_x[a] < data.test_x[b]; });
  std::vector<double> xs(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) xs[k] = data.test_x[order[k]];
  const auto pred = predict(net, xs, s);

  std::vector<double> lo_in, hi_in, y_in, lo_out, hi_out, y_out;
  double ep_in = 0.0, ep_ood = 0.0;
  std::size_t n_in = 0, n_ood = 0;
  const auto& dc = data.config;
  for (std::size_t k = 0; k < order.size(); ++k) {
    CurvePoint c;
    c.x = xs[k];
    c.y_true = target_function(c.x);
    c.y = data.test_y[order[k]];
    c.q05 = pred[k].q05;
    c.q95 = pred[k].q95;
    c.aleatoric = pred[k].aleatoric;
    c.epistemic = pred[k].epistemic;
    c.in_distribution = dc.train_lo <= c.x && c.x <= dc.train_hi;
    if (c.in_distribution) {
      lo_in.push_back(c.q05);
      hi_in.push_back(c.q95);
      y_in.push_back(c.y);
      ep_in += c.epistemic;
      ++n_in;
    } else {
      lo_out.push_back(c.q05);
      hi_out.push_back(c.q95);
      y_out.push_back(c.y);
    }
    if (std::abs(c.x) >= 4.0 && std::abs(c.x) <= 5.0) {
      ep_ood += c.epistemic;
      ++n_ood;
    }
    report.curve.push_back(c);
  }
  const double p = config.loss.coverage_p;
  report.coverage_in = band_coverage(lo_in, hi_in, y_in, p);
  report.coverage_out = band_coverage(lo_out, hi_out, y_out, p);
  report.epistemic_in = n_in ? ep_in / static_cast<double>(n_in) : 0.0;
  report.epistemic_ood = n_ood ? ep_ood / static_cast<double>(n_ood) : 0.0;
  return report;
}

void write_curve_csv(std::ostream& out, const Report& report) {
  out << "x,y_true,y,q05,q95,aleatoric,epistemic,in_distribution\n";
  for (const auto& c : report.curve) {
    out << format_number(c.x) << ',' << format_number(c.y_true) << ',' << format_number(c.y) << ','
        << format_number(c.q05) << ',' << format_number(c.q95) << ','
        << format_number(c.aleatoric) << ',' << format_number(c.epistemic) << ','
        << (c.in_distribution ? 1 : 0) << '\n';
  }
}

}  // namespace ceqr::synthetic
