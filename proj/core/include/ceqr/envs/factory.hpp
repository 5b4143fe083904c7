#pragma once

#include <memory>
#include <string>
#include <variant>

#include "ceqr/envs/chain_world.hpp"
#include "ceqr/envs/trap_maze.hpp"

namespace ceqr::envs {

struct EnvConfig {
  std::string type = "chain";  ///< "chain" or "trapmaze"
  ChainWorldConfig chain;
  TrapMazeConfig maze;
  void validate() const;
};

std::unique_ptr<Environment> make_environment(const EnvConfig& config);

}  // namespace ceqr::envs
