#pragma once

#include <random>
#include <string>
#include <vector>

#include "ceqr/envs/environment.hpp"

namespace ceqr::envs {

struct TrapMazeConfig {
  /// Rows of the map: '.' floor, '#' wall, 'H' hidden passage (observed as a
  /// wall but walkable), 'T' trap, 'S' start, 'G' goal.
  std::vector<std::string> layout = {
      "G.........",
      "..........",
      "..........",
      "TTTTTTTT..",
      "H########.",
      "..........",
      "..........",
      "..........",
      "..........",
      "S.........",
  };
  double trap_probability = 0.25;
  double trap_reward = -1.0;
  double goal_reward = 10.0;
  std::size_t max_episode_steps = 100;
  void validate() const;
};

/// Grid maze with four actions (up, right, down, left) and four observation
/// channels (agent, wall, trap, goal). Stepping onto a trap pays trap_reward
/// with probability trap_probability. The long route to the goal runs through
/// the gap on the right, past the end of the trap row. The hidden passage looks
/// like a wall and gives a shorter path that crosses a trap.
class TrapMaze final : public Environment {
 public:
  enum Action : std::size_t { up = 0, right = 1, down = 2, left = 3 };
  enum Channel : std::size_t { agent = 0, wall = 1, trap = 2, goal = 3 };

  explicit TrapMaze(TrapMazeConfig config = {});

  std::string name() const override { return "trapmaze"; }
  const EnvSpec& spec() const override { return spec_; }
  RewardRange reward_range() const override;
  nnet::Tensor reset(std::uint64_t seed) override;
  StepResult step(std::size_t action) override;

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }
  bool is_trap(std::size_t r, std::size_t c) const;
  bool is_walkable(std::size_t r, std::size_t c) const;

 private:
  char cell(std::size_t r, std::size_t c) const { return config_.layout[r][c]; }
  nnet::Tensor observe() const;

  TrapMazeConfig config_;
  EnvSpec spec_;
  std::mt19937_64 rng_;
  std::size_t start_row_ = 0, start_col_ = 0;
  std::size_t row_ = 0, col_ = 0;
  std::size_t steps_ = 0;
  bool done_ = true;
};

}  // namespace ceqr::envs
