#include "ceqr/envs/trap_maze.hpp"

#include "ceqr/errors.hpp"

namespace ceqr::envs {

void TrapMazeConfig::validate() const {
  if (layout.empty() || layout.front().empty()) throw ConfigError("trapmaze: empty layout");
  std::size_t starts = 0, goals = 0;
  for (const auto& row : layout) {
    if (row.size() != layout.front().size()) throw ConfigError("trapmaze: ragged layout");
    for (char c : row) {
      if (std::string(".#HTSG").find(c) == std::string::npos) {
        throw ConfigError(std::string("trapmaze: unknown cell '") + c + "'");
      }
      starts += c == 'S';
      goals += c == 'G';
    }
  }
  if (starts != 1 || goals != 1) throw ConfigError("trapmaze: need exactly one S and one G");
  if (!(trap_probability >= 0.0 && trap_probability <= 1.0)) {
    throw ConfigError("env.trap_probability must be in [0, 1]");
  }
  if (max_episode_steps == 0) throw ConfigError("env.max_episode_steps must be positive");
}

TrapMaze::TrapMaze(TrapMazeConfig config) : config_(std::move(config)) {
  config_.validate();
  spec_ = {config_.layout.size(), config_.layout.front().size(), 4, 4, config_.max_episode_steps};
  for (std::size_t r = 0; r < spec_.height; ++r) {
    for (std::size_t c = 0; c < spec_.width; ++c) {
      if (cell(r, c) == 'S') {
        start_row_ = r;
        start_col_ = c;
      }
    }
  }
}

RewardRange TrapMaze::reward_range() const {
  return {std::min(0.0, config_.trap_reward), std::max(0.0, config_.goal_reward)};
}

bool TrapMaze::is_trap(std::size_t r, std::size_t c) const { return cell(r, c) == 'T'; }

bool TrapMaze::is_walkable(std::size_t r, std::size_t c) const { return cell(r, c) != '#'; }

nnet::Tensor TrapMaze::observe() const {
  const std::size_t h = spec_.height, w = spec_.width;
  nnet::Tensor obs({h, w, 4});
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const char x = cell(r, c);
      if (x == '#' || x == 'H') obs.at({r, c, wall}) = 1.0;
      if (x == 'T') obs.at({r, c, trap}) = 1.0;
      if (x == 'G') obs.at({r, c, goal}) = 1.0;
    }
  }
  obs.at({row_, col_, agent}) = 1.0;
  return obs;
}

nnet::Tensor TrapMaze::reset(std::uint64_t seed) {
  rng_.seed(seed);
  row_ = start_row_;
  col_ = start_col_;
  steps_ = 0;
  done_ = false;
  return observe();
}

StepResult TrapMaze::step(std::size_t action) {
  if (action >= 4) throw DomainError("trapmaze: action " + std::to_string(action) + " out of range");
  if (done_) throw StateError("trapmaze: step on a finished episode");
  std::size_t r = row_, c = col_;
  switch (action) {
    case up: if (r > 0) --r; break;
    case right: if (c + 1 < spec_.width) ++c; break;
    case down: if (r + 1 < spec_.height) ++r; break;
    case left: if (c > 0) --c; break;
    default: break;
  }
  if (is_walkable(r, c)) {
    row_ = r;
    col_ = c;
  }
  ++steps_;

  StepResult result;
  if (is_trap(row_, col_)) {
    std::bernoulli_distribution sprung(config_.trap_probability);
    const bool hit = sprung(rng_);
    if (hit) result.reward += config_.trap_reward;
    result.info["trap"] = hit ? 1.0 : 0.0;
  }
  if (cell(row_, col_) == 'G') {
    result.reward += config_.goal_reward;
    result.done = true;
    result.info["goal"] = 1.0;
  }
  if (cell(row_, col_) == 'H') result.info["shortcut"] = 1.0;
  if (steps_ >= config_.max_episode_steps) {
    result.done = true;
    if (!result.info.count("goal")) result.info["truncated"] = 1.0;
  }
  done_ = result.done;
  result.observation = observe();
  return result;
}

}  // namespace ceqr::envs
