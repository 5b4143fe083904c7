#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "ceqr/nnet/tensor.hpp"

namespace ceqr::agent {

struct Transition {
  nnet::Tensor state;
  std::size_t action = 0;
  double reward = 0.0;
  nnet::Tensor next_state;
  bool done = false;
};

/// A sampled minibatch with states stacked along a leading batch axis.
struct TransitionBatch {
  nnet::Tensor states;       ///< [B, H, W, O]
  std::vector<std::size_t> actions;
  std::vector<double> rewards;
  nnet::Tensor next_states;  ///< [B, H, W, O]
  std::vector<bool> dones;
  std::size_t size() const { return actions.size(); }
};

/// FIFO ring of transitions with uniform sampling (with replacement).
/// Observations must be binary grids; they are stored one byte per cell.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t start_threshold, std::uint64_t seed);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t start_threshold() const noexcept { return start_threshold_; }
  std::size_t size() const noexcept { return size_; }
  bool ready() const noexcept { return size_ >= start_threshold_; }

  void push(const Transition& transition);

  /// Throws BufferNotReady below the start threshold.
  TransitionBatch sample(std::size_t batch_size);

  /// Stored transition by age, 0 being the oldest still held.
  Transition at(std::size_t age) const;

  std::mt19937_64& rng() noexcept { return rng_; }

 private:
  void pack(const nnet::Tensor& obs, std::uint8_t* dst) const;
  nnet::Tensor unpack(const std::uint8_t* src) const;
  std::size_t slot(std::size_t age) const;

  std::size_t capacity_;
  std::size_t start_threshold_;
  std::mt19937_64 rng_;
  nnet::Shape obs_shape_;
  std::size_t obs_size_ = 0;
  std::vector<std::uint8_t> states_;
  std::vector<std::uint8_t> next_states_;
  std::vector<std::size_t> actions_;
  std::vector<double> rewards_;
  std::vector<bool> dones_;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
};

}  // namespace ceqr::agent
