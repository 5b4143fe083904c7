#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "ceqr/nnet/tensor.hpp"

namespace ceqr::envs {

/// Observation grid extents and action count. Observations are
/// [height, width, channels] binary grids.
struct EnvSpec {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 0;
  std::size_t num_actions = 0;
  std::size_t max_episode_steps = 0;
  void validate() const;
};

struct StepResult {
  nnet::Tensor observation;
  double reward = 0.0;
  bool done = false;
  std::map<std::string, double> info;
};

struct RewardRange {
  double min;
  double max;
};

/// Episodic grid task. Each instance owns its RNG stream, reseeded on reset.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual const EnvSpec& spec() const = 0;
  virtual RewardRange reward_range() const = 0;

  virtual nnet::Tensor reset(std::uint64_t seed) = 0;
  /// Throws DomainError for actions outside [0, A) and StateError when called
  /// on a finished episode.
  virtual StepResult step(std::size_t action) = 0;
};

}  // namespace ceqr::envs
