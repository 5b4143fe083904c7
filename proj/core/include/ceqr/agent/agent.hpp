#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "ceqr/agent/action_selection.hpp"
#include "ceqr/agent/config.hpp"
#include "ceqr/agent/replay_buffer.hpp"
#include "ceqr/envs/environment.hpp"
#include "ceqr/metrics.hpp"
#include "ceqr/nnet/adam.hpp"
#include "ceqr/nnet/qnetwork.hpp"

namespace ceqr::agent {

/// Online and target networks, optimizer, replay memory and the action RNG
/// stream of one CEQR-DQN learner.
class Agent {
 public:
  Agent(const envs::EnvSpec& env, AgentConfig config, std::uint64_t seed);

  const AgentConfig& config() const noexcept { return config_; }
  nnet::QNetwork& online() noexcept { return online_; }
  nnet::QNetwork& target() noexcept { return target_; }
  ReplayBuffer& buffer() noexcept { return buffer_; }
  nnet::Adam& optimizer() noexcept { return adam_; }
  std::mt19937_64& rng() noexcept { return rng_; }
  std::size_t optimization_steps() const noexcept { return optimization_steps_; }

  ActionDecision act(const nnet::Tensor& observation);

  /// One minibatch update. Throws BufferNotReady before warm-up completes and
  /// TrainingError if a loss turns non-finite.
  TrainStats train_step();

  /// Hard copy of the online weights into the target network.
  void sync_target();

 private:
  AgentConfig config_;
  nnet::QNetwork online_;
  nnet::QNetwork target_;
  nnet::Adam adam_;
  ReplayBuffer buffer_;
  std::mt19937_64 rng_;
  losses::QuantileLevels levels_;
  std::size_t optimization_steps_ = 0;
};

enum class RunMode { train, eval };

struct EpisodeResult {
  double episode_return = 0.0;
  std::size_t steps = 0;
  bool reached_goal = false;
  std::vector<double> psi_ep;  ///< per step, for the chosen action
  std::vector<double> psi_al;
  double greedy_agreement = 0.0;
  std::size_t train_steps = 0;
  TrainStats mean_losses;
};

/// Plays one episode. In train mode every transition is stored and, once the
/// buffer is warm, an optimization step runs every `update_frequency` frames;
/// `frame_counter` is advanced per environment step and the episode is cut
/// short when it reaches `frame_limit`. Eval mode neither stores nor trains.
EpisodeResult run_episode(envs::Environment& env, Agent& agent, RunMode mode,
                          std::uint64_t env_seed, std::size_t& frame_counter,
                          std::size_t frame_limit);

struct EvalSummary {
  std::size_t episodes = 0;
  double mean_return = 0.0;
  double success_rate = 0.0;  ///< fraction of episodes that reached the goal
  std::vector<double> returns;
};

struct TrainingSummary {
  std::vector<MetricsRecord> records;
  EvalSummary eval;
  std::size_t frames = 0;
  std::size_t optimization_steps = 0;
};

EvalSummary evaluate(envs::Environment& env, Agent& agent, std::size_t episodes,
                     std::uint64_t seed);

/// Trains for `frames` environment steps, then evaluates for `eval_episodes`.
/// `on_episode` (optional) sees each metrics record as it is produced.
TrainingSummary train(envs::Environment& env, Agent& agent, std::size_t frames,
                      std::size_t eval_episodes, std::uint64_t seed,
                      const std::function<void(const MetricsRecord&)>& on_episode = {});

}  // namespace ceqr::agent
