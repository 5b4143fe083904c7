#include "ceqr/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "ceqr/errors.hpp"

namespace ceqr {

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& expected) {
  throw ConfigError(key + ": expected " + expected + ", got '" + value + "'");
}

double parse_double(const std::string& key, const std::string& text) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(key, text, "a number");
  return v;
}

std::uint64_t parse_uint(const std::string& key, const std::string& text) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(key, text, "a non-negative integer");
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  bad_value(key, text, "true or false");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& text) {
  std::vector<T> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) bad_value(key, text, "a comma-separated integer list");
    out.push_back(static_cast<T>(parse_uint(key, item.substr(b, e - b + 1))));
  }
  if (out.empty()) bad_value(key, text, "a non-empty list");
  return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Field {
  std::string key;  // section.name
  std::function<std::string(const RunConfig&)> get;
  std::function<void(RunConfig&, const std::string&)> set;
};

template <typename Access>
Field double_field(std::string key, Access access) {
  return {key, [access](const RunConfig& c) { return fmt_double(access(const_cast<RunConfig&>(c))); },
          [access, key](RunConfig& c, const std::string& v) { access(c) = parse_double(key, v); }};
}

template <typename Access>
Field uint_field(std::string key, Access access) {
  return {key, [access](const RunConfig& c) { return std::to_string(access(const_cast<RunConfig&>(c))); },
          [access, key](RunConfig& c, const std::string& v) {
            access(c) = static_cast<std::remove_reference_t<decltype(access(c))>>(parse_uint(key, v));
          }};
}

template <typename Access>
Field bool_field(std::string key, Access access) {
  return {key,
          [access](const RunConfig& c) {
            return std::string(access(const_cast<RunConfig&>(c)) ? "true" : "false");
          },
          [access, key](RunConfig& c, const std::string& v) { access(c) = parse_bool(key, v); }};
}

template <typename Access>
Field string_field(std::string key, Access access) {
  return {key, [access](const RunConfig& c) { return access(const_cast<RunConfig&>(c)); },
          [access](RunConfig& c, const std::string& v) { access(c) = v; }};
}

template <typename T, typename Access>
Field list_field(std::string key, Access access) {
  return {key, [access](const RunConfig& c) { return join(access(const_cast<RunConfig&>(c))); },
          [access, key](RunConfig& c, const std::string& v) { access(c) = parse_list<T>(key, v); }};
}

#define CEQR_AT(expr) [](RunConfig& c) -> auto& { return c.expr; }

const std::vector<Field>& fields() {
  static const std::vector<Field> table = {
      list_field<std::uint64_t>("run.seeds", CEQR_AT(run.seeds)),
      uint_field("run.frames", CEQR_AT(run.frames)),
      uint_field("run.eval_episodes", CEQR_AT(run.eval_episodes)),
      string_field("run.out", CEQR_AT(run.out)),
      uint_field("run.threads", CEQR_AT(run.threads)),

      uint_field("agent.num_quantiles", CEQR_AT(agent.num_quantiles)),
      double_field("agent.gamma_discount", CEQR_AT(agent.gamma_discount)),
      double_field("agent.lambda_ep", CEQR_AT(agent.lambda_ep)),
      double_field("agent.lambda_al", CEQR_AT(agent.lambda_al)),
      uint_field("agent.batch_size", CEQR_AT(agent.batch_size)),
      uint_field("agent.target_sync_period", CEQR_AT(agent.target_sync_period)),
      uint_field("agent.replay_capacity", CEQR_AT(agent.replay_capacity)),
      uint_field("agent.replay_start", CEQR_AT(agent.replay_start)),
      uint_field("agent.update_frequency", CEQR_AT(agent.update_frequency)),
      double_field("agent.learning_rate", CEQR_AT(agent.learning_rate)),
      double_field("agent.adam_epsilon", CEQR_AT(agent.adam_epsilon)),
      uint_field("agent.conv_filters", CEQR_AT(agent.conv_filters)),
      uint_field("agent.conv_kernel", CEQR_AT(agent.conv_kernel)),
      {"agent.mode", [](const RunConfig& c) { return agent::to_string(c.agent.mode); },
       [](RunConfig& c, const std::string& v) { c.agent.mode = agent::parse_optimization_mode(v); }},

      double_field("loss.kappa", CEQR_AT(agent.loss.kappa)),
      double_field("loss.lambda_reg", CEQR_AT(agent.loss.lambda_reg)),
      double_field("loss.lambda_cal", CEQR_AT(agent.loss.lambda_cal)),
      double_field("loss.coverage_p", CEQR_AT(agent.loss.coverage_p)),
      double_field("loss.interval_q", CEQR_AT(agent.loss.interval_q)),

      string_field("env.type", CEQR_AT(env.type)),
      uint_field("env.chain_length", CEQR_AT(env.chain.length)),
      double_field("env.chain_left_reward", CEQR_AT(env.chain.left_reward)),
      double_field("env.chain_goal_reward", CEQR_AT(env.chain.goal_reward)),
      uint_field("env.chain_max_episode_steps", CEQR_AT(env.chain.max_episode_steps)),
      double_field("env.maze_trap_probability", CEQR_AT(env.maze.trap_probability)),
      double_field("env.maze_trap_reward", CEQR_AT(env.maze.trap_reward)),
      double_field("env.maze_goal_reward", CEQR_AT(env.maze.goal_reward)),
      uint_field("env.maze_max_episode_steps", CEQR_AT(env.maze.max_episode_steps)),

      uint_field("synthetic.n_train", CEQR_AT(synthetic.n_train)),
      uint_field("synthetic.n_test", CEQR_AT(synthetic.n_test)),
      list_field<std::uint64_t>("synthetic.seeds", CEQR_AT(synthetic.seeds)),
      double_field("synthetic.train_lo", CEQR_AT(synthetic.data.train_lo)),
      double_field("synthetic.train_hi", CEQR_AT(synthetic.data.train_hi)),
      double_field("synthetic.test_lo", CEQR_AT(synthetic.data.test_lo)),
      double_field("synthetic.test_hi", CEQR_AT(synthetic.data.test_hi)),
      double_field("synthetic.noise_scale", CEQR_AT(synthetic.data.noise_scale)),
      list_field<std::size_t>("synthetic.hidden", CEQR_AT(synthetic.model.hidden)),
      uint_field("synthetic.steps", CEQR_AT(synthetic.model.steps)),
      uint_field("synthetic.batch_size", CEQR_AT(synthetic.model.batch_size)),
      double_field("synthetic.learning_rate", CEQR_AT(synthetic.model.learning_rate)),
      bool_field("synthetic.normalize", CEQR_AT(synthetic.model.normalize)),
      uint_field("synthetic.history_every", CEQR_AT(synthetic.model.history_every)),
      double_field("synthetic.kappa", CEQR_AT(synthetic.model.loss.kappa)),
      double_field("synthetic.lambda_reg", CEQR_AT(synthetic.model.loss.lambda_reg)),
      double_field("synthetic.lambda_cal", CEQR_AT(synthetic.model.loss.lambda_cal)),
      double_field("synthetic.coverage_p", CEQR_AT(synthetic.model.loss.coverage_p)),
      double_field("synthetic.interval_q", CEQR_AT(synthetic.model.loss.interval_q)),
  };
  return table;
}

#undef CEQR_AT

const Field& find_field(const std::string& key) {
  for (const auto& f : fields()) {
    if (f.key == key) return f;
  }
  throw ConfigError(key + ": unknown setting");
}

}  // namespace

void RunConfig::validate() const {
  if (run.seeds.empty()) throw ConfigError("run.seeds: need at least one seed");
  if (run.frames == 0) throw ConfigError("run.frames: must be positive");
  if (run.threads == 0) throw ConfigError("run.threads: must be positive");
  if (run.out.empty()) throw ConfigError("run.out: must not be empty");
  agent.validate();
  env.validate();
  if (synthetic.n_train == 0) throw ConfigError("synthetic.n_train: must be positive");
  if (synthetic.n_test == 0) throw ConfigError("synthetic.n_test: must be positive");
  if (synthetic.seeds.empty()) throw ConfigError("synthetic.seeds: need at least one seed");
  synthetic.data.validate();
  synthetic.model.validate();
}

void set_config_value(RunConfig& config, const std::string& dotted_key, const std::string& value) {
  find_field(dotted_key).set(config, value);
}

std::string get_config_value(const RunConfig& config, const std::string& dotted_key) {
  return find_field(dotted_key).get(config);
}

RunConfig parse_config(std::istream& in) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  RunConfig config;
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) {
      throw ConfigError(section + ": setting outside any section");
    }
    for (const auto& [key, node] : body) set_config_value(config, section + "." + key, node.data());
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path.string());
  return parse_config(in);
}

void write_config(std::ostream& out, const RunConfig& config) {
  std::string current;
  for (const auto& f : fields()) {
    const auto dot = f.key.find('.');
    const std::string section = f.key.substr(0, dot);
    if (section != current) {
      if (!current.empty()) out << '\n';
      out << '[' << section << "]\n";
      current = section;
    }
    out << f.key.substr(dot + 1) << " = " << f.get(config) << '\n';
  }
}

void save_config(const std::filesystem::path& path, const RunConfig& config) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_config(out, config);
}

}  // namespace ceqr
