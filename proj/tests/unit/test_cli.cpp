#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ceqr/cli/cli.hpp"
#include "ceqr/config.hpp"
#include "ceqr/errors.hpp"

namespace fs = std::filesystem;
using namespace ceqr;

namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("ceqr_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
  }
  void TearDown() override { fs::remove_all(root_); }
  fs::path root_;
};

const std::vector<std::string> kSmallRun = {"--frames", "400", "--set", "agent.replay_start=100",
                                            "--set", "agent.num_quantiles=8", "--set",
                                            "run.eval_episodes=2"};

std::vector<std::string> with(std::vector<std::string> head, const std::vector<std::string>& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

}  // namespace

TEST(Config, DefaultsRoundTrip) {
  RunConfig c;
  c.agent.lambda_ep = 0.1 + 0.2;  // not exactly representable in short form
  c.synthetic.model.hidden = {32, 16, 8};
  std::stringstream ss;
  write_config(ss, c);
  const auto back = parse_config(ss);
  std::stringstream again;
  write_config(again, back);
  EXPECT_EQ(ss.str(), again.str());
  EXPECT_EQ(back.agent.lambda_ep, c.agent.lambda_ep);
  EXPECT_EQ(back.synthetic.model.hidden, c.synthetic.model.hidden);
}

TEST(Config, OverridesAndErrors) {
  RunConfig c;
  set_config_value(c, "agent.lambda_ep", "0.005");
  EXPECT_EQ(c.agent.lambda_ep, 0.005);
  set_config_value(c, "env.type", "trapmaze");
  EXPECT_EQ(get_config_value(c, "env.type"), "trapmaze");
  EXPECT_THROW(set_config_value(c, "agent.nonsense", "1"), ConfigError);
  EXPECT_THROW(set_config_value(c, "agent.batch_size", "many"), ConfigError);
  std::istringstream bad("[agent]\nlambda_ep = -3\n");
  try {
    parse_config(bad);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("agent.lambda_ep"), std::string::npos) << e.what();
  }
}

TEST_F(CliTest, InvalidInvocationsExitTwo) {
  EXPECT_EQ(invoke({}).code, cli::config_error);
  EXPECT_EQ(invoke({"train-rl", "--set", "agent.lambda_ep=-1", "--out", root_.string()}).code,
            cli::config_error);
  fs::create_directories(root_);
  std::ofstream(root_ / "bad.ini") << "[agent\nthis is not ini\n";
  const auto r = invoke({"train-rl", "--config", (root_ / "bad.ini").string()});
  EXPECT_EQ(r.code, cli::config_error);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, SameSeedGivesByteIdenticalMetrics) {
  const auto a = invoke(with({"train-rl", "--seed", "7", "--out", (root_ / "a").string()}, kSmallRun));
  const auto b = invoke(with({"train-rl", "--seed", "7", "--out", (root_ / "b").string()}, kSmallRun));
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  const auto ma = slurp(root_ / "a" / "seed_7" / "metrics.csv");
  EXPECT_FALSE(ma.empty());
  EXPECT_EQ(ma, slurp(root_ / "b" / "seed_7" / "metrics.csv"));
  EXPECT_EQ(ma.substr(0, ma.find('\n')),
            "step,episode,return,L_qr,L_cal_Z,L_nll,L_reg,L_cal_EL,L_interval,mean_psi_ep,"
            "mean_psi_al,greedy_agreement");
}

TEST_F(CliTest, ResolvedConfigReproducesRun) {
  ASSERT_EQ(invoke(with({"train-rl", "--seed", "3", "--out", (root_ / "a").string()}, kSmallRun)).code, 0);
  const auto resolved = (root_ / "a" / "resolved_config.ini").string();
  ASSERT_TRUE(fs::exists(resolved));
  const auto r = invoke({"train-rl", "--config", resolved, "--seed", "3", "--out", (root_ / "b").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(root_ / "a" / "seed_3" / "metrics.csv"), slurp(root_ / "b" / "seed_3" / "metrics.csv"));
}

TEST_F(CliTest, MissingOutputDirectoryIsCreated) {
  const auto nested = root_ / "x" / "y" / "z";
  ASSERT_EQ(invoke(with({"train-rl", "--seed", "1", "--out", nested.string()}, kSmallRun)).code, 0);
  EXPECT_TRUE(fs::exists(nested / "summary.json"));
  EXPECT_TRUE(fs::exists(nested / "seed_1" / "checkpoint.json"));
}

TEST_F(CliTest, EvalFromCheckpoint) {
  ASSERT_EQ(invoke(with({"train-rl", "--seed", "2", "--out", root_.string()}, kSmallRun)).code, 0);
  const auto r = invoke({"eval", "--config", (root_ / "resolved_config.ini").string(), "--checkpoint",
                         (root_ / "seed_2" / "checkpoint.json").string(), "--episodes", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_FALSE(r.out.empty());
}

TEST_F(CliTest, GradCheckExitCodes) {
  EXPECT_EQ(invoke({"grad-check", "--trials", "50", "--only", "huber", "evidential_nll"}).code, cli::ok);
  const auto bad = invoke({"grad-check", "--only", "huber", "--corrupt", "0.01"});
  EXPECT_EQ(bad.code, cli::runtime_failure);
  EXPECT_NE(bad.out.find("FAIL"), std::string::npos);
}

TEST_F(CliTest, SyntheticAndPlots) {
  const auto r = invoke({"train-synthetic", "--seed", "0", "--out", root_.string(), "--set",
                         "synthetic.steps=100", "--set", "synthetic.n_train=200", "--set",
                         "synthetic.n_test=100"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(root_ / "synthetic_seed_0.csv"));
  EXPECT_TRUE(fs::exists(root_ / "synthetic_summary.json"));
  const auto p = invoke({"emit-plots", "--out", (root_ / "plots").string(), "--set",
                         "synthetic.steps=100", "--set", "synthetic.n_train=200"});
  EXPECT_EQ(p.code, 0) << p.err;
  EXPECT_TRUE(fs::exists(root_ / "plots" / "synthetic_curve.csv"));
}
