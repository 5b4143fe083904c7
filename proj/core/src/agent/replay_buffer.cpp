#include "ceqr/agent/replay_buffer.hpp"

#include <algorithm>

#include "ceqr/errors.hpp"

namespace ceqr::agent {

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t start_threshold, std::uint64_t seed)
    : capacity_(capacity), start_threshold_(start_threshold), rng_(seed) {
  if (capacity_ == 0) throw ConfigError("replay: capacity must be positive");
  if (start_threshold_ == 0 || start_threshold_ > capacity_) {
    throw ConfigError("replay: start threshold must be in [1, capacity]");
  }
}

void ReplayBuffer::pack(const nnet::Tensor& obs, std::uint8_t* dst) const {
  if (obs.shape() != obs_shape_) {
    throw ShapeError("replay: observation shape " + nnet::shape_to_string(obs.shape()) +
                     " differs from " + nnet::shape_to_string(obs_shape_));
  }
  const auto data = obs.data();
  for (std::size_t i = 0; i < obs_size_; ++i) {
    if (data[i] != 0.0 && data[i] != 1.0) throw DomainError("replay: observations must be binary");
    dst[i] = data[i] != 0.0 ? 1 : 0;
  }
}

nnet::Tensor ReplayBuffer::unpack(const std::uint8_t* src) const {
  nnet::Tensor obs(obs_shape_);
  auto data = obs.data();
  for (std::size_t i = 0; i < obs_size_; ++i) data[i] = src[i];
  return obs;
}

void ReplayBuffer::push(const Transition& t) {
  if (obs_shape_.empty()) {
    obs_shape_ = t.state.shape();
    obs_size_ = t.state.size();
  }
  const std::size_t slot = head_;
  if (states_.size() < (slot + 1) * obs_size_) {
    states_.resize((slot + 1) * obs_size_);
    next_states_.resize((slot + 1) * obs_size_);
    actions_.resize(slot + 1);
    rewards_.resize(slot + 1);
    dones_.resize(slot + 1);
  }
  pack(t.state, &states_[slot * obs_size_]);
  pack(t.next_state, &next_states_[slot * obs_size_]);
  actions_[slot] = t.action;
  rewards_[slot] = t.reward;
  dones_[slot] = t.done;
  head_ = (head_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

std::size_t ReplayBuffer::slot(std::size_t age) const {
  const std::size_t oldest = size_ < capacity_ ? 0 : head_;
  return (oldest + age) % capacity_;
}

Transition ReplayBuffer::at(std::size_t age) const {
  if (age >= size_) throw ShapeError("replay: index beyond stored transitions");
  const std::size_t s = slot(age);
  return {unpack(&states_[s * obs_size_]), actions_[s], rewards_[s],
          unpack(&next_states_[s * obs_size_]), dones_[s]};
}

TransitionBatch ReplayBuffer::sample(std::size_t batch_size) {
  if (!ready()) {
    throw BufferNotReady("replay: " + std::to_string(size_) + " transitions stored, need " +
                         std::to_string(start_threshold_));
  }
  nnet::Shape batch_shape{batch_size};
  batch_shape.insert(batch_shape.end(), obs_shape_.begin(), obs_shape_.end());
  TransitionBatch batch{nnet::Tensor(batch_shape), {}, {}, nnet::Tensor(batch_shape), {}};
  batch.actions.reserve(batch_size);
  batch.rewards.reserve(batch_size);
  batch.dones.reserve(batch_size);
  std::uniform_int_distribution<std::size_t> pick(0, size_ - 1);
  auto states = batch.states.data();
  auto next_states = batch.next_states.data();
  for (std::size_t b = 0; b < batch_size; ++b) {
    const std::size_t s = slot(pick(rng_));
    for (std::size_t i = 0; i < obs_size_; ++i) {
      states[b * obs_size_ + i] = states_[s * obs_size_ + i];
      next_states[b * obs_size_ + i] = next_states_[s * obs_size_ + i];
    }
    batch.actions.push_back(actions_[s]);
    batch.rewards.push_back(rewards_[s]);
    batch.dones.push_back(dones_[s]);
  }
  return batch;
}

}  // namespace ceqr::agent
