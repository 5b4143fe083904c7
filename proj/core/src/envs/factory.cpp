#include "ceqr/envs/factory.hpp"

#include "ceqr/errors.hpp"

namespace ceqr::envs {

void EnvConfig::validate() const {
  if (type == "chain") {
    chain.validate();
  } else if (type == "trapmaze") {
    maze.validate();
  } else {
    throw ConfigError("env.type must be 'chain' or 'trapmaze', got '" + type + "'");
  }
}

std::unique_ptr<Environment> make_environment(const EnvConfig& config) {
  config.validate();
  if (config.type == "chain") return std::make_unique<ChainWorld>(config.chain);
  return std::make_unique<TrapMaze>(config.maze);
}

}  // namespace ceqr::envs
