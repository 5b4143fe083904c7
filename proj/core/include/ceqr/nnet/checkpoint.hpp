#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "ceqr/nnet/adam.hpp"
#include "ceqr/nnet/qnetwork.hpp"
#include "ceqr/nnet/tensor.hpp"

namespace ceqr::nnet {

inline constexpr int kCheckpointVersion = 1;

/// Everything needed to resume a run: network shape and weights, optimizer
/// moments, and the RNG stream position.
struct Checkpoint {
  int version = kCheckpointVersion;
  QNetworkConfig network;
  std::vector<Parameter> parameters;
  AdamConfig adam_config;
  AdamState adam_state;
  std::string rng_state;
};

Checkpoint capture_checkpoint(const QNetwork& net, const Adam& adam,
                              const std::mt19937_64& rng);
/// Overwrites parameters, optimizer state and RNG state. Throws ConfigError if
/// the checkpoint was taken from a differently shaped network.
void restore_checkpoint(const Checkpoint& checkpoint, QNetwork& net, Adam& adam,
                        std::mt19937_64& rng);

/// JSON container; doubles are written in shortest round-trip form, so a
/// save/load cycle reproduces parameters bit for bit.
void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint);
Checkpoint load_checkpoint(const std::filesystem::path& path);

std::string checkpoint_to_json(const Checkpoint& checkpoint);
Checkpoint checkpoint_from_json(const std::string& text);

}  // namespace ceqr::nnet
