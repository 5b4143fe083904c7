#include "ceqr/nnet/checkpoint.hpp"

#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "ceqr/errors.hpp"

namespace ceqr::nnet {

using nlohmann::json;

Checkpoint capture_checkpoint(const QNetwork& net, const Adam& adam,
                              const std::mt19937_64& rng) {
  Checkpoint ckpt;
  ckpt.network = net.config();
  for (const Parameter* p : net.parameters()) {
    Tensor copy = p->value;
    copy.drop_grad();
    ckpt.parameters.push_back({p->name, std::move(copy)});
  }
  ckpt.adam_config = adam.config();
  ckpt.adam_state = adam.state();
  std::ostringstream os;
  os << rng;
  ckpt.rng_state = os.str();
  return ckpt;
}

void restore_checkpoint(const Checkpoint& checkpoint, QNetwork& net, Adam& adam,
                        std::mt19937_64& rng) {
  auto params = net.parameters();
  if (params.size() != checkpoint.parameters.size()) {
    throw ConfigError("checkpoint: parameter count mismatch");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Parameter& src = checkpoint.parameters[i];
    if (src.name != params[i]->name || src.value.shape() != params[i]->value.shape()) {
      throw ConfigError("checkpoint: parameter '" + src.name + "' " +
                        shape_to_string(src.value.shape()) + " does not match '" +
                        params[i]->name + "' " +
                        shape_to_string(params[i]->value.shape()));
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto from = checkpoint.parameters[i].value.data();
    std::copy(from.begin(), from.end(), params[i]->value.data().begin());
  }
  adam = Adam(checkpoint.adam_config);
  adam.set_state(checkpoint.adam_state);
  if (!checkpoint.rng_state.empty()) {
    std::istringstream is(checkpoint.rng_state);
    is >> rng;
    if (!is) throw ConfigError("checkpoint: malformed rng state");
  }
}

std::string checkpoint_to_json(const Checkpoint& c) {
  json j;
  j["format"] = "ceqr-checkpoint";
  j["version"] = c.version;
  j["network"] = {{"height", c.network.height},
                  {"width", c.network.width},
                  {"channels", c.network.channels},
                  {"num_actions", c.network.num_actions},
                  {"num_quantiles", c.network.num_quantiles},
                  {"filters", c.network.filters},
                  {"kernel", c.network.kernel},
                  {"init_seed", c.network.init_seed}};
  json params = json::array();
  for (const auto& p : c.parameters) {
    params.push_back({{"name", p.name}, {"shape", p.value.shape()}, {"data", p.value.values()}});
  }
  j["parameters"] = std::move(params);
  j["adam"] = {{"learning_rate", c.adam_config.learning_rate},
               {"beta1", c.adam_config.beta1},
               {"beta2", c.adam_config.beta2},
               {"epsilon", c.adam_config.epsilon},
               {"step", c.adam_state.step},
               {"first_moment", c.adam_state.first_moment},
               {"second_moment", c.adam_state.second_moment}};
  j["rng_state"] = c.rng_state;
  return j.dump();
}

Checkpoint checkpoint_from_json(const std::string& text) {
  Checkpoint c;
  try {
    const json j = json::parse(text);
    if (j.at("format").get<std::string>() != "ceqr-checkpoint") {
      throw ConfigError("checkpoint: unrecognised format tag");
    }
    c.version = j.at("version").get<int>();
    if (c.version != kCheckpointVersion) {
      throw ConfigError("checkpoint: unsupported version " + std::to_string(c.version));
    }
    const auto& n = j.at("network");
    c.network.height = n.at("height").get<std::size_t>();
    c.network.width = n.at("width").get<std::size_t>();
    c.network.channels = n.at("channels").get<std::size_t>();
    c.network.num_actions = n.at("num_actions").get<std::size_t>();
    c.network.num_quantiles = n.at("num_quantiles").get<std::size_t>();
    c.network.filters = n.at("filters").get<std::size_t>();
    c.network.kernel = n.at("kernel").get<std::size_t>();
    c.network.init_seed = n.at("init_seed").get<std::uint64_t>();
    for (const auto& p : j.at("parameters")) {
      c.parameters.push_back({p.at("name").get<std::string>(),
                              Tensor(p.at("shape").get<Shape>(),
                                     p.at("data").get<std::vector<double>>())});
    }
    const auto& a = j.at("adam");
    c.adam_config.learning_rate = a.at("learning_rate").get<double>();
    c.adam_config.beta1 = a.at("beta1").get<double>();
    c.adam_config.beta2 = a.at("beta2").get<double>();
    c.adam_config.epsilon = a.at("epsilon").get<double>();
    c.adam_state.step = a.at("step").get<std::uint64_t>();
    c.adam_state.first_moment = a.at("first_moment").get<std::vector<std::vector<double>>>();
    c.adam_state.second_moment = a.at("second_moment").get<std::vector<std::vector<double>>>();
    c.rng_state = j.at("rng_state").get<std::string>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checkpoint: ") + e.what());
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string());
  out << checkpoint_to_json(checkpoint);
  if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_json(buf.str());
}

}  // namespace ceqr::nnet
