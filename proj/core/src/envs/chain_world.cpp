#include "ceqr/envs/chain_world.hpp"

#include "ceqr/errors.hpp"

namespace ceqr::envs {

void EnvSpec::validate() const {
  if (height == 0 || width == 0 || channels == 0 || num_actions == 0 || max_episode_steps == 0) {
    throw ConfigError("env spec: all extents must be positive");
  }
}

void ChainWorldConfig::validate() const {
  if (length < 2) throw ConfigError("env.chain_length must be >= 2");
  if (max_episode_steps == 0) throw ConfigError("env.max_episode_steps must be positive");
}

ChainWorld::ChainWorld(ChainWorldConfig config) : config_(config) {
  config_.validate();
  spec_ = {1, config_.length, 1, 2, config_.max_episode_steps};
}

RewardRange ChainWorld::reward_range() const {
  return {std::min(0.0, config_.left_reward), std::max(config_.goal_reward, config_.left_reward)};
}

nnet::Tensor ChainWorld::observe() const {
  nnet::Tensor obs({1, config_.length, 1});
  obs[position_] = 1.0;
  return obs;
}

nnet::Tensor ChainWorld::reset(std::uint64_t /*seed*/) {
  position_ = 0;
  steps_ = 0;
  done_ = false;
  return observe();
}

StepResult ChainWorld::step(std::size_t action) {
  if (action >= 2) throw DomainError("chain: action " + std::to_string(action) + " out of range");
  if (done_) throw StateError("chain: step on a finished episode");
  StepResult result;
  ++steps_;
  if (action == kLeft) {
    if (position_ > 0) --position_;
    result.reward = config_.left_reward;
  } else {
    ++position_;
    if (position_ == config_.length - 1) {
      result.reward = config_.goal_reward;
      result.done = true;
      result.info["goal"] = 1.0;
    }
  }
  if (steps_ >= config_.max_episode_steps) {
    result.done = true;
    if (!result.info.count("goal")) result.info["truncated"] = 1.0;
  }
  done_ = result.done;
  result.observation = observe();
  return result;
}

}  // namespace ceqr::envs
