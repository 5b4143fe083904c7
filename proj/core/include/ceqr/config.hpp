#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ceqr/agent/config.hpp"
#include "ceqr/envs/factory.hpp"
#include "ceqr/synthetic.hpp"

namespace ceqr {

struct RunSection {
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::size_t frames = 50000;
  std::size_t eval_episodes = 20;
  std::string out = "runs";
  std::size_t threads = 1;  ///< seeds trained concurrently
};

struct SyntheticSection {
  std::size_t n_train = 2000;
  std::size_t n_test = 1000;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  synthetic::DataConfig data;
  synthetic::ModelConfig model;
};

/// Every setting a subcommand can use. Defaults are the published
/// hyperparameters where one exists.
struct RunConfig {
  RunSection run;
  agent::AgentConfig agent;
  envs::EnvConfig env;
  SyntheticSection synthetic;

  /// Throws ConfigError naming the offending section.key.
  void validate() const;
};

/// Reads an INI file with [run], [agent], [loss], [env] and [synthetic]
/// sections over the defaults. Unknown keys and malformed values throw
/// ConfigError.
RunConfig load_config(const std::filesystem::path& path);
RunConfig parse_config(std::istream& in);

/// Applies one "section.key=value" override.
void set_config_value(RunConfig& config, const std::string& dotted_key, const std::string& value);
std::string get_config_value(const RunConfig& config, const std::string& dotted_key);

/// Writes every setting. Reading the result back yields an identical config.
void write_config(std::ostream& out, const RunConfig& config);
void save_config(const std::filesystem::path& path, const RunConfig& config);

}  // namespace ceqr
