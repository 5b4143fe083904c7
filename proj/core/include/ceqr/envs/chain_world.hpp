#pragma once

#include "ceqr/envs/environment.hpp"

namespace ceqr::envs {

struct ChainWorldConfig {
  std::size_t length = 10;
  double left_reward = 0.1;
  double goal_reward = 10.0;
  std::size_t max_episode_steps = 40;
  void validate() const;
};

/// A 1 x L corridor starting at cell 0. Action 0 steps left (clamped) and
/// pays left_reward; action 1 steps right and pays nothing until the last
/// cell, which pays goal_reward and ends the episode. Observation is a
/// one-hot position in a single channel.
class ChainWorld final : public Environment {
 public:
  static constexpr std::size_t kLeft = 0;
  static constexpr std::size_t kRight = 1;

  explicit ChainWorld(ChainWorldConfig config = {});

  std::string name() const override { return "chain"; }
  const EnvSpec& spec() const override { return spec_; }
  RewardRange reward_range() const override;
  nnet::Tensor reset(std::uint64_t seed) override;
  StepResult step(std::size_t action) override;

  std::size_t position() const noexcept { return position_; }

 private:
  nnet::Tensor observe() const;

  ChainWorldConfig config_;
  EnvSpec spec_;
  std::size_t position_ = 0;
  std::size_t steps_ = 0;
  bool done_ = true;
};

}  // namespace ceqr::envs
