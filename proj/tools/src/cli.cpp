#include "ceqr/cli/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>
#include <thread>

#include "ceqr/agent/agent.hpp"
#include "ceqr/config.hpp"
#include "ceqr/errors.hpp"
#include "ceqr/gradcheck.hpp"
#include "ceqr/metrics.hpp"
#include "ceqr/nnet/checkpoint.hpp"
#include "ceqr/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace ceqr::cli {

namespace {

constexpr int kSummarySchemaVersion = 1;

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> frames;
  std::optional<std::string> out;
  std::optional<std::string> env;
  std::optional<double> lambda_ep;
  std::optional<double> lambda_al;
  std::vector<std::string> sets;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "INI config file");
  cmd->add_option("--seed", f.seed, "Run a single seed instead of the configured list");
  cmd->add_option("--frames", f.frames, "Environment frames per seed");
  cmd->add_option("--out", f.out, "Output directory");
  cmd->add_option("--env", f.env, "Environment: chain or trapmaze");
  cmd->add_option("--lambda-ep", f.lambda_ep, "Epistemic Thompson-sampling scale");
  cmd->add_option("--lambda-al", f.lambda_al, "Aleatoric risk penalty");
  cmd->add_option("--set", f.sets, "Override one setting, section.key=value (repeatable)");
}

RunConfig resolve(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  for (const auto& s : f.sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("--set: expected section.key=value, got '" + s + "'");
    set_config_value(c, s.substr(0, eq), s.substr(eq + 1));
  }
  if (f.seed) {
    c.run.seeds = {*f.seed};
    c.synthetic.seeds = {*f.seed};
  }
  if (f.frames) c.run.frames = *f.frames;
  if (f.out) c.run.out = *f.out;
  if (f.env) c.env.type = *f.env;
  if (f.lambda_ep) c.agent.lambda_ep = *f.lambda_ep;
  if (f.lambda_al) c.agent.lambda_al = *f.lambda_al;
  c.validate();
  return c;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

std::string fixed(double v, int digits = 3) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct SeedResult {
  std::uint64_t seed = 0;
  std::size_t episodes = 0;
  std::size_t frames = 0;
  double mean_return = 0.0;
  double max_return = 0.0;
  agent::EvalSummary eval;
};

SeedResult train_seed(const RunConfig& c, std::uint64_t seed, const fs::path& dir) {
  fs::create_directories(dir);
  auto env = envs::make_environment(c.env);
  agent::Agent learner(env->spec(), c.agent, seed);
  std::ofstream csv(dir / "metrics.csv");
  if (!csv) throw std::runtime_error("cannot write " + (dir / "metrics.csv").string());
  csv << metrics_csv_header() << '\n';
  const auto summary = agent::train(*env, learner, c.run.frames, c.run.eval_episodes, seed,
                                    [&](const MetricsRecord& r) { csv << metrics_csv_row(r) << '\n'; });
  nnet::save_checkpoint(dir / "checkpoint.json",
                        nnet::capture_checkpoint(learner.online(), learner.optimizer(), learner.rng()));

  SeedResult r;
  r.seed = seed;
  r.episodes = summary.records.size();
  r.frames = summary.frames;
  r.eval = summary.eval;
  double total = 0.0;
  r.max_return = summary.records.empty() ? 0.0 : summary.records.front().episode_return;
  for (const auto& rec : summary.records) {
    total += rec.episode_return;
    r.max_return = std::max(r.max_return, rec.episode_return);
  }
  if (!summary.records.empty()) r.mean_return = total / static_cast<double>(summary.records.size());
  return r;
}

int cmd_train_rl(const RunConfig& c, std::ostream& out) {
  const fs::path root(c.run.out);
  fs::create_directories(root);
  save_config(root / "resolved_config.ini", c);

  std::vector<SeedResult> results(c.run.seeds.size());
  std::vector<std::exception_ptr> errors(c.run.seeds.size());
  const auto work = [&](std::size_t k) {
    try {
      const auto seed = c.run.seeds[k];
      results[k] = train_seed(c, seed, root / ("seed_" + std::to_string(seed)));
    } catch (...) {
      errors[k] = std::current_exception();
    }
  };
  const std::size_t workers = std::min(c.run.threads, c.run.seeds.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < c.run.seeds.size(); ++k) work(k);
  } else {
    std::size_t next = 0;
    std::mutex m;
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        while (true) {
          std::size_t k;
          {
            std::lock_guard lock(m);
            if (next >= c.run.seeds.size()) return;
            k = next++;
          }
          work(k);
        }
      });
    }
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  json summary = {{"schema_version", kSummarySchemaVersion}, {"command", "train-rl"},
                  {"env", c.env.type}, {"frames", c.run.frames}};
  out << "seed  episodes  mean_return  max_return  eval_mean  eval_success\n";
  for (const auto& r : results) {
    out << r.seed << "  " << r.episodes << "  " << fixed(r.mean_return) << "  "
        << fixed(r.max_return) << "  " << fixed(r.eval.mean_return) << "  "
        << fixed(r.eval.success_rate, 2) << '\n';
    summary["seeds"].push_back({{"seed", r.seed},
                                {"episodes", r.episodes},
                                {"frames", r.frames},
                                {"mean_return", r.mean_return},
                                {"max_return", r.max_return},
                                {"eval_mean_return", r.eval.mean_return},
                                {"eval_success_rate", r.eval.success_rate}});
  }
  write_json(root / "summary.json", summary);
  return ok;
}

int cmd_train_synthetic(const RunConfig& c, std::ostream& out) {
  const fs::path root(c.run.out);
  fs::create_directories(root);
  save_config(root / "resolved_config.ini", c);

  json summary = {{"schema_version", kSummarySchemaVersion}, {"command", "train-synthetic"}};
  out << "seed  coverage_in  coverage_out  epistemic_in  epistemic_ood  inflation\n";
  for (const auto seed : c.synthetic.seeds) {
    const auto data = synthetic::generate(c.synthetic.n_train, c.synthetic.n_test, seed, c.synthetic.data);
    auto model = c.synthetic.model;
    model.seed = seed;
    const auto report = synthetic::fit_and_evaluate(data, model);
    std::ofstream csv(root / ("synthetic_seed_" + std::to_string(seed) + ".csv"));
    synthetic::write_curve_csv(csv, report);
    out << seed << "  " << fixed(report.coverage_in) << "  " << fixed(report.coverage_out) << "  "
        << fixed(report.epistemic_in, 4) << "  " << fixed(report.epistemic_ood, 4) << "  "
        << fixed(report.inflation(), 2) << '\n';
    summary["seeds"].push_back({{"seed", seed},
                                {"coverage_in", report.coverage_in},
                                {"coverage_out", report.coverage_out},
                                {"epistemic_in", report.epistemic_in},
                                {"epistemic_ood", report.epistemic_ood},
                                {"inflation", report.inflation()},
                                {"final_loss", report.final_loss},
                                {"aleatoric_history", report.aleatoric_history}});
  }
  write_json(root / "synthetic_summary.json", summary);
  return ok;
}

int cmd_eval(const RunConfig& c, const std::string& checkpoint, std::size_t episodes,
             std::ostream& out) {
  auto env = envs::make_environment(c.env);
  const auto seed = c.run.seeds.front();
  agent::Agent learner(env->spec(), c.agent, seed);
  const auto ck = nnet::load_checkpoint(checkpoint);
  restore_checkpoint(ck, learner.online(), learner.optimizer(), learner.rng());
  learner.sync_target();
  const auto summary = agent::evaluate(*env, learner, episodes, seed);
  out << "episodes " << summary.episodes << "  mean_return " << fixed(summary.mean_return)
      << "  success_rate " << fixed(summary.success_rate, 2) << '\n';
  return ok;
}

int cmd_grad_check(const gradcheck::Options& options, std::ostream& out) {
  const auto rows = gradcheck::run(options);
  bool all = true;
  out << "loss               trials  params  max_rel_error  status\n";
  for (const auto& r : rows) {
    char line[160];
    std::snprintf(line, sizeof line, "%-18s %6zu  %6zu  %13.3e  %s\n", r.loss.c_str(), r.trials,
                  r.parameters, r.max_relative_error, r.passed ? "PASS" : "FAIL");
    out << line;
    all = all && r.passed;
  }
  return all ? ok : runtime_failure;
}

// Learning curves of a train-rl output directory, one row per episode.
void write_learning_curve(const fs::path& runs, const fs::path& dest) {
  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(runs)) {
    if (entry.is_directory() && entry.path().filename().string().rfind("seed_", 0) == 0 &&
        fs::exists(entry.path() / "metrics.csv")) {
      dirs.push_back(entry.path());
    }
  }
  std::sort(dirs.begin(), dirs.end());
  std::ofstream csv(dest);
  csv << "seed,episode,step,return,mean_psi_ep,mean_psi_al\n";
  for (const auto& d : dirs) {
    const std::string seed = d.filename().string().substr(5);
    std::ifstream in(d / "metrics.csv");
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
      std::vector<std::string> cols;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cols.push_back(cell);
      if (cols.size() < 12) continue;
      csv << seed << ',' << cols[1] << ',' << cols[0] << ',' << cols[2] << ',' << cols[9] << ','
          << cols[10] << '\n';
    }
  }
}

int cmd_emit_plots(const RunConfig& c, const std::string& runs, std::ostream& out) {
  const fs::path root(c.run.out);
  fs::create_directories(root);
  const auto seed = c.synthetic.seeds.front();
  const auto data = synthetic::generate(c.synthetic.n_train, c.synthetic.n_test, seed, c.synthetic.data);
  auto model = c.synthetic.model;
  model.seed = seed;
  const auto report = synthetic::fit_and_evaluate(data, model);
  {
    std::ofstream csv(root / "synthetic_curve.csv");
    synthetic::write_curve_csv(csv, report);
  }
  out << "wrote " << (root / "synthetic_curve.csv").string() << '\n';
  if (!runs.empty()) {
    if (!fs::is_directory(runs)) throw ConfigError("--runs: not a directory: " + runs);
    write_learning_curve(runs, root / "learning_curve.csv");
    out << "wrote " << (root / "learning_curve.csv").string() << '\n';
  }
  return ok;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Calibrated evidential quantile regression DQN"};
  app.name("ceqr");
  app.require_subcommand(1);

  CommonFlags rl_flags, syn_flags, eval_flags, grad_flags, plot_flags;
  auto* train_rl = app.add_subcommand("train-rl", "Train agents over the configured seeds");
  add_common(train_rl, rl_flags);

  auto* train_syn = app.add_subcommand("train-synthetic", "Fit the 1-D synthetic benchmark");
  add_common(train_syn, syn_flags);

  auto* eval = app.add_subcommand("eval", "Evaluate a saved checkpoint");
  add_common(eval, eval_flags);
  std::string checkpoint;
  std::size_t episodes = 20;
  eval->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();
  eval->add_option("--episodes", episodes, "Evaluation episodes");

  auto* grad = app.add_subcommand("grad-check", "Finite-difference audit of every loss");
  add_common(grad, grad_flags);
  gradcheck::Options gopts;
  grad->add_option("--trials", gopts.trials, "Random draws per loss");
  grad->add_option("--only", gopts.only, "Restrict to these losses");
  grad->add_option("--corrupt", gopts.corrupt, "Scale analytic gradients by (1 + x); test hook")
      ->group("");

  auto* plots = app.add_subcommand("emit-plots", "Write plot-ready CSV files");
  add_common(plots, plot_flags);
  std::string runs;
  plots->add_option("--runs", runs, "train-rl output directory to summarize");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : config_error;
  }

  try {
    if (train_rl->parsed()) return cmd_train_rl(resolve(rl_flags), out);
    if (train_syn->parsed()) return cmd_train_synthetic(resolve(syn_flags), out);
    if (eval->parsed()) return cmd_eval(resolve(eval_flags), checkpoint, episodes, out);
    if (grad->parsed()) {
      const auto c = resolve(grad_flags);
      if (grad_flags.seed) gopts.seed = *grad_flags.seed;
      (void)c;
      return cmd_grad_check(gopts, out);
    }
    if (plots->parsed()) return cmd_emit_plots(resolve(plot_flags), runs, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return runtime_failure;
  }
  return runtime_failure;
}

}  // namespace ceqr::cli
