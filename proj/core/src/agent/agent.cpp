#include "ceqr/agent/agent.hpp"

#include <cmath>
#include <sstream>

#include "ceqr/errors.hpp"
#include "ceqr/objectives.hpp"

namespace ceqr::agent {

std::string to_string(OptimizationMode mode) {
  return mode == OptimizationMode::joint ? "joint" : "alternating";
}

OptimizationMode parse_optimization_mode(const std::string& text) {
  if (text == "joint") return OptimizationMode::joint;
  if (text == "alternating") return OptimizationMode::alternating;
  throw ConfigError("agent.mode: expected 'joint' or 'alternating', got '" + text + "'");
}

void AgentConfig::validate() const {
  const auto fail = [](const std::string& field, const std::string& why) {
    throw ConfigError("agent." + field + ": " + why);
  };
  if (num_quantiles < 2) fail("num_quantiles", "must be at least 2");
  if (!(gamma_discount >= 0.0 && gamma_discount <= 1.0)) fail("gamma_discount", "must lie in [0, 1]");
  if (!(lambda_ep >= 0.0) || !std::isfinite(lambda_ep)) fail("lambda_ep", "must be finite and >= 0");
  if (!(lambda_al >= 0.0) || !std::isfinite(lambda_al)) fail("lambda_al", "must be finite and >= 0");
  if (batch_size == 0) fail("batch_size", "must be positive");
  if (target_sync_period == 0) fail("target_sync_period", "must be positive");
  if (replay_capacity == 0) fail("replay_capacity", "must be positive");
  if (replay_start == 0 || replay_start > replay_capacity) {
    fail("replay_start", "must lie in [1, replay_capacity]");
  }
  if (update_frequency == 0) fail("update_frequency", "must be positive");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate", "must be > 0");
  if (!(adam_epsilon > 0.0)) fail("adam_epsilon", "must be > 0");
  if (conv_filters == 0) fail("conv_filters", "must be positive");
  if (conv_kernel == 0 || conv_kernel % 2 == 0) fail("conv_kernel", "must be odd");
  loss.validate();
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

nnet::QNetworkConfig network_config(const envs::EnvSpec& env, const AgentConfig& c,
                                    std::uint64_t seed) {
  nnet::QNetworkConfig nc;
  nc.height = env.height;
  nc.width = env.width;
  nc.channels = env.channels;
  nc.num_actions = env.num_actions;
  nc.num_quantiles = c.num_quantiles;
  nc.filters = c.conv_filters;
  nc.kernel = c.conv_kernel;
  nc.init_seed = seed;
  return nc;
}

nnet::AdamConfig adam_config(const AgentConfig& c) {
  nnet::AdamConfig ac;
  ac.learning_rate = c.learning_rate;
  ac.epsilon = c.adam_epsilon;
  return ac;
}

void require_finite(const TrainStats& s) {
  const std::pair<const char*, double> terms[] = {
      {"L_qr", s.qr},       {"L_cal_Z", s.cal_z},          {"L_nll", s.nll},
      {"L_reg", s.reg},     {"L_cal_EL", s.cal_el},        {"L_interval", s.interval}};
  for (const auto& [name, value] : terms) {
    if (!std::isfinite(value)) {
      std::ostringstream os;
      os << "train_step: non-finite loss " << name << " (" << value << ")";
      throw TrainingError(os.str());
    }
  }
}

}  // namespace

Agent::Agent(const envs::EnvSpec& env, AgentConfig config, std::uint64_t seed)
    : config_((config.validate(), config)),
      online_(network_config(env, config_, derive_seed(seed, 1))),
      target_(network_config(env, config_, derive_seed(seed, 1))),
      adam_(adam_config(config_)),
      buffer_(config_.replay_capacity, config_.replay_start, derive_seed(seed, 2)),
      rng_(derive_seed(seed, 3)),
      levels_(losses::QuantileLevels::midpoints(config_.num_quantiles)) {
  env.validate();
  target_.copy_parameters_from(online_);
}

ActionDecision Agent::act(const nnet::Tensor& observation) {
  return select_action(online_, observation, config_.lambda_ep, config_.lambda_al, rng_);
}

void Agent::sync_target() { target_.copy_parameters_from(online_); }

TrainStats Agent::train_step() {
  const auto& nc = online_.config();
  const std::size_t batch = config_.batch_size;
  const std::size_t actions = nc.num_actions;
  const std::size_t n = nc.num_quantiles;
  auto sample = buffer_.sample(batch);

  // Bellman targets from the target network, one row per transition.
  std::vector<double> targets(batch * n);
  {
    const auto next = target_.forward(sample.next_states, nnet::Heads::action_only);
    const auto q = next.quantiles.data();
    for (std::size_t b = 0; b < batch; ++b) {
      const auto row = bellman_target(q.subspan(b * actions * n, actions * n), actions,
                                      sample.rewards[b], sample.dones[b],
                                      config_.gamma_discount);
      std::copy(row.begin(), row.end(), targets.begin() + static_cast<std::ptrdiff_t>(b * n));
    }
  }

  const bool do_z = config_.mode == OptimizationMode::joint || optimization_steps_ % 2 == 0;
  const bool do_el = config_.mode == OptimizationMode::joint || optimization_steps_ % 2 == 1;

  const auto out = online_.forward(sample.states, nnet::Heads::both);
  const auto quant = out.quantiles.data();
  const auto evid = out.evidential.data();
  const auto evid_offset = [&](std::size_t b, std::size_t field, std::size_t a, std::size_t level,
                               std::size_t i) {
    return (((b * 4 + field) * actions + a) * 2 + level) * n + i;
  };

  std::vector<double> taken(batch * n);
  objectives::NigBatch nig(batch, n);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t a = sample.actions[b];
    for (std::size_t i = 0; i < n; ++i) taken[b * n + i] = quant[(b * actions + a) * n + i];
    for (std::size_t level = 0; level < 2; ++level) {
      for (std::size_t i = 0; i < n; ++i) {
        const std::size_t k = (b * 2 + level) * n + i;
        nig.gamma[k] = evid[evid_offset(b, 0, a, level, i)];
        nig.v[k] = evid[evid_offset(b, 1, a, level, i)];
        nig.alpha[k] = evid[evid_offset(b, 2, a, level, i)];
        nig.beta[k] = evid[evid_offset(b, 3, a, level, i)];
      }
    }
  }

  const losses::BatchView target_view(targets, batch, n);
  std::vector<double> grad_taken(batch * n, 0.0);
  objectives::NigBatch grad_nig(batch, n);
  const auto z = objectives::z_loss(losses::BatchView(taken, batch, n), target_view, levels_,
                                    config_.loss, grad_taken);
  const auto el = objectives::el_loss(nig, target_view, config_.loss, &grad_nig);

  TrainStats stats;
  stats.qr = z.qr;
  stats.cal_z = z.cal;
  stats.nll = el.nll;
  stats.reg = el.reg;
  stats.cal_el = el.cal;
  stats.interval = el.interval;
  stats.total = (do_z ? z.total : 0.0) + (do_el ? el.total : 0.0);
  require_finite(stats);

  nnet::Tensor grad_q(out.quantiles.shape());
  nnet::Tensor grad_e;
  if (do_z) {
    auto g = grad_q.data();
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t a = sample.actions[b];
      for (std::size_t i = 0; i < n; ++i) g[(b * actions + a) * n + i] = grad_taken[b * n + i];
    }
  }
  if (do_el) {
    grad_e = nnet::Tensor(out.evidential.shape());
    auto g = grad_e.data();
    for (std::size_t b = 0; b < batch; ++b) {
      const std::size_t a = sample.actions[b];
      for (std::size_t level = 0; level < 2; ++level) {
        for (std::size_t i = 0; i < n; ++i) {
          const std::size_t k = (b * 2 + level) * n + i;
          g[evid_offset(b, 0, a, level, i)] = grad_nig.gamma[k];
          g[evid_offset(b, 1, a, level, i)] = grad_nig.v[k];
          g[evid_offset(b, 2, a, level, i)] = grad_nig.alpha[k];
          g[evid_offset(b, 3, a, level, i)] = grad_nig.beta[k];
        }
      }
    }
  }

  online_.zero_grad();
  online_.backward(grad_q, grad_e);
  const auto params = online_.parameters();
  adam_.step(params);

  ++optimization_steps_;
  if (optimization_steps_ % config_.target_sync_period == 0) sync_target();
  return stats;
}

EpisodeResult run_episode(envs::Environment& env, Agent& agent, RunMode mode,
                          std::uint64_t env_seed, std::size_t& frame_counter,
                          std::size_t frame_limit) {
  EpisodeResult result;
  auto state = env.reset(env_seed);
  std::size_t agreements = 0;
  const auto& cfg = agent.config();
  while (true) {
    if (mode == RunMode::train && frame_counter >= frame_limit) break;
    const auto decision = agent.act(state);
    auto step = env.step(decision.action);
    ++result.steps;
    result.episode_return += step.reward;
    result.psi_ep.push_back(decision.psi_ep[decision.action]);
    result.psi_al.push_back(decision.psi_al[decision.action]);
    agreements += decision.action == decision.greedy_action;
    if (step.info.count("goal")) result.reached_goal = true;

    if (mode == RunMode::train) {
      agent.buffer().push({std::move(state), decision.action, step.reward, step.observation,
                           step.done});
      ++frame_counter;
      if (agent.buffer().ready() && frame_counter % cfg.update_frequency == 0) {
        const auto s = agent.train_step();
        auto& m = result.mean_losses;
        m.qr += s.qr;
        m.cal_z += s.cal_z;
        m.nll += s.nll;
        m.reg += s.reg;
        m.cal_el += s.cal_el;
        m.interval += s.interval;
        m.total += s.total;
        ++result.train_steps;
      }
    }
    state = std::move(step.observation);
    if (step.done) break;
  }
  if (result.train_steps > 0) {
    auto& m = result.mean_losses;
    const double k = static_cast<double>(result.train_steps);
    m.qr /= k;
    m.cal_z /= k;
    m.nll /= k;
    m.reg /= k;
    m.cal_el /= k;
    m.interval /= k;
    m.total /= k;
  }
  if (result.steps > 0) {
    result.greedy_agreement = static_cast<double>(agreements) / static_cast<double>(result.steps);
  }
  return result;
}

namespace {

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

EvalSummary evaluate(envs::Environment& env, Agent& agent, std::size_t episodes,
                     std::uint64_t seed) {
  EvalSummary summary;
  summary.episodes = episodes;
  std::size_t frames = 0;
  std::size_t successes = 0;
  for (std::size_t e = 0; e < episodes; ++e) {
    const auto r = run_episode(env, agent, RunMode::eval, derive_seed(seed, 1000 + e), frames, 0);
    summary.returns.push_back(r.episode_return);
    successes += r.reached_goal;
  }
  summary.mean_return = mean_of(summary.returns);
  if (episodes > 0) {
    summary.success_rate = static_cast<double>(successes) / static_cast<double>(episodes);
  }
  return summary;
}

TrainingSummary train(envs::Environment& env, Agent& agent, std::size_t frames,
                      std::size_t eval_episodes, std::uint64_t seed,
                      const std::function<void(const MetricsRecord&)>& on_episode) {
  TrainingSummary summary;
  std::size_t frame_counter = 0;
  std::size_t episode = 0;
  while (frame_counter < frames) {
    const auto r = run_episode(env, agent, RunMode::train, derive_seed(seed, episode), frame_counter,
                               frames);
    if (r.steps == 0) break;
    MetricsRecord rec;
    rec.step = frame_counter;
    rec.episode = episode;
    rec.episode_return = r.episode_return;
    if (r.train_steps > 0) rec.losses = r.mean_losses;
    rec.mean_psi_ep = mean_of(r.psi_ep);
    rec.mean_psi_al = mean_of(r.psi_al);
    rec.greedy_agreement = r.greedy_agreement;
    if (on_episode) on_episode(rec);
    summary.records.push_back(rec);
    ++episode;
  }
  summary.frames = frame_counter;
  summary.optimization_steps = agent.optimization_steps();
  if (eval_episodes > 0) summary.eval = evaluate(env, agent, eval_episodes, derive_seed(seed, 7));
  return summary;
}

}  // namespace ceqr::agent
