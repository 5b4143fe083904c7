#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "ceqr/agent/agent.hpp"
#include "ceqr/envs/chain_world.hpp"
#include "ceqr/errors.hpp"

using namespace ceqr;
using namespace ceqr::agent;
using evidential::NIGParams;
using evidential::NIGQuantileSet;

namespace {

NIGQuantileSet constant_nig(std::size_t actions, std::size_t n, const std::vector<double>& v,
                            const std::vector<double>& gap) {
  std::vector<NIGParams> params;
  for (std::size_t a = 0; a < actions; ++a) {
    for (std::size_t level = 0; level < 2; ++level) {
      for (std::size_t i = 0; i < n; ++i) params.emplace_back(level * gap[a], v[a], 2.0, 1.0);
    }
  }
  return NIGQuantileSet(actions, n, std::move(params));
}

std::vector<std::vector<double>> snapshot(const nnet::QNetwork& net) {
  std::vector<std::vector<double>> out;
  for (const auto* p : net.parameters()) out.emplace_back(p->value.values().begin(), p->value.values().end());
  return out;
}

AgentConfig small_agent() {
  AgentConfig c;
  c.num_quantiles = 5;
  c.batch_size = 8;
  c.replay_start = 20;
  c.replay_capacity = 1000;
  return c;
}

void fill_buffer(ReplayBuffer& buffer, std::size_t count, std::uint64_t seed) {
  envs::ChainWorld env;
  std::mt19937_64 rng(seed);
  auto obs = env.reset(seed);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t a = rng() % 2;
    auto step = env.step(a);
    buffer.push({obs, a, step.reward, step.observation, step.done});
    obs = step.done ? env.reset(rng()) : step.observation;
  }
}

}  // namespace

TEST(SelectAction, VanishingEpistemicWeightIsGreedy) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> pos(0.1, 5.0);
  const std::size_t A = 4, N = 6;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> q(A * N);
    for (auto& v : q) v = n01(rng);
    std::vector<NIGParams> params;
    for (std::size_t k = 0; k < A * 2 * N; ++k) params.emplace_back(n01(rng), pos(rng), 1 + pos(rng), pos(rng));
    const NIGQuantileSet nig(A, N, params);
    const auto d = select_action(q, nig, 1e-14, 0.0, rng);
    std::size_t best = 0;
    double best_mean = -INFINITY;
    for (std::size_t a = 0; a < A; ++a) {
      double m = 0.0;
      for (std::size_t i = 0; i < N; ++i) m += q[a * N + i];
      if (m / N > best_mean) best_mean = m / N, best = a;
    }
    ASSERT_EQ(d.action, best) << trial;
    ASSERT_EQ(d.greedy_action, best);
  }
}

TEST(SelectAction, SymmetricActionsSplitEvenly) {
  std::mt19937_64 rng(2);
  const std::vector<double> q(2 * 3, 0.0);
  const auto nig = constant_nig(2, 3, {1.0, 1.0}, {0.0, 0.0});
  int zeros = 0;
  for (int k = 0; k < 10000; ++k) zeros += select_action(q, nig, 0.01, 0.0, rng).action == 0;
  EXPECT_NEAR(zeros / 10000.0, 0.5, 0.02);
}

TEST(SelectAction, AleatoricPenaltyFavoursLowNoiseAction) {
  std::mt19937_64 rng(3);
  const std::vector<double> q(2 * 3, 1.0);
  const auto nig = constant_nig(2, 3, {1.0, 1.0}, {0.1, 5.0});
  int zeros = 0;
  for (int k = 0; k < 4000; ++k) zeros += select_action(q, nig, 0.5, 0.2, rng).action == 0;
  EXPECT_GT(zeros, 2400);
}

TEST(SelectAction, CommonShiftDoesNotChangeDecision) {
  std::mt19937_64 gen(4);
  std::normal_distribution<double> n01;
  const auto nig = constant_nig(3, 4, {0.5, 1.0, 2.0}, {1, 1, 1});
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> q(12), shifted(12);
    for (std::size_t k = 0; k < 12; ++k) {
      q[k] = n01(gen);
      shifted[k] = q[k] + 4.0;
    }
    std::mt19937_64 r1(trial), r2(trial);
    EXPECT_EQ(select_action(q, nig, 0.3, 0.0, r1).action,
              select_action(shifted, nig, 0.3, 0.0, r2).action);
  }
}

TEST(SelectAction, NonFiniteOutputsRaiseDecisionError) {
  std::mt19937_64 rng(5);
  std::vector<double> q(2 * 3, 0.0);
  q[4] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(select_action(q, constant_nig(2, 3, {1, 1}, {0, 0}), 0.01, 0.0, rng), DecisionError);
}

TEST(BellmanTarget, DoneGivesRewardEverywhere) {
  const std::vector<double> next = {3, 4, 5, -1, 0, 9};
  EXPECT_EQ(bellman_target(next, 2, 1.0, true, 0.99), std::vector<double>(3, 1.0));
}

TEST(BellmanTarget, ZeroDiscountGivesReward) {
  const std::vector<double> next = {3, 4, 5, -1, 0, 9};
  EXPECT_EQ(bellman_target(next, 2, -0.7, false, 0.0), std::vector<double>(3, -0.7));
}

TEST(BellmanTarget, ConstantQuantilesAffineMap) {
  EXPECT_EQ(bellman_target(std::vector<double>(6, 1.0), 2, 0.0, false, 0.99),
            std::vector<double>(3, 0.99));
}

TEST(BellmanTarget, PicksLargestMeanAction) {
  const std::vector<double> next = {0, 0, 3, 1, 1, 1};  // means 1 and 1 + tie -> lowest index
  EXPECT_EQ(bellman_target(next, 2, 0.0, false, 1.0), (std::vector<double>{0, 0, 3}));
  const std::vector<double> next2 = {0, 0, 2.9, 1, 1, 1};
  EXPECT_EQ(bellman_target(next2, 2, 0.0, false, 1.0), (std::vector<double>{1, 1, 1}));
}

TEST(BellmanTarget, ScalingNextQuantilesScalesTarget) {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n01;
  for (double c : {0.25, 2.0, 8.0}) {
    std::vector<double> next(8), scaled(8);
    for (std::size_t k = 0; k < 8; ++k) {
      next[k] = n01(rng);
      scaled[k] = c * next[k];
    }
    const auto base = bellman_target(next, 2, 0.0, false, 0.99);
    const auto out = bellman_target(scaled, 2, 0.0, false, 0.99);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(out[i], c * base[i]);
    const auto base_r = bellman_target(next, 2, 0.5, false, 0.99);
    const auto out_r = bellman_target(scaled, 2, 0.5, false, 0.99);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(out_r[i] - 0.5, c * (base_r[i] - 0.5), 1e-14);
  }
}

TEST(BellmanTarget, NetworkOverloadUsesTargetNetwork) {
  nnet::QNetworkConfig nc{1, 10, 1, 2, 5, 16, 3, 4};
  nnet::QNetwork net(nc);
  envs::ChainWorld env;
  const auto s = env.reset(0);
  const auto q = net.forward(s, nnet::Heads::action_only).quantiles;
  EXPECT_EQ(bellman_target(net, 0.3, s, false, 0.9), bellman_target(q.values(), 2, 0.3, false, 0.9));
}

TEST(ReplayBuffer, FifoEviction) {
  ReplayBuffer buffer(3, 1, 0);
  const nnet::Tensor obs({1, 2, 1}, std::vector<double>{1, 0});
  for (std::size_t a = 0; a < 5; ++a) buffer.push({obs, a, static_cast<double>(a), obs, false});
  EXPECT_EQ(buffer.size(), 3u);
  EXPECT_EQ(buffer.at(0).action, 2u);
  EXPECT_EQ(buffer.at(1).action, 3u);
  EXPECT_EQ(buffer.at(2).action, 4u);
  EXPECT_EQ(buffer.at(0).state, obs);
  const auto batch = buffer.sample(64);
  for (auto a : batch.actions) {
    EXPECT_GE(a, 2u);
    EXPECT_LE(a, 4u);
  }
}

TEST(ReplayBuffer, StartThresholdGatesSampling) {
  ReplayBuffer buffer(10, 3, 0);
  const nnet::Tensor obs({1, 2, 1}, std::vector<double>{0, 1});
  for (int k = 0; k < 2; ++k) {
    buffer.push({obs, 0, 0.0, obs, false});
    EXPECT_FALSE(buffer.ready());
    EXPECT_THROW(buffer.sample(1), BufferNotReady);
  }
  buffer.push({obs, 1, 0.0, obs, true});
  EXPECT_TRUE(buffer.ready());
  const auto batch = buffer.sample(4);
  EXPECT_EQ(batch.size(), 4u);
  EXPECT_EQ(batch.states.shape(), (nnet::Shape{4, 1, 2, 1}));
}

TEST(ReplayBuffer, NonBinaryObservationRejected) {
  ReplayBuffer buffer(4, 1, 0);
  const nnet::Tensor obs({1, 2, 1}, std::vector<double>{0.5, 1});
  EXPECT_ANY_THROW(buffer.push({obs, 0, 0.0, obs, false}));
}

TEST(Agent, TrainStepBeforeWarmupThrows) {
  envs::ChainWorld env;
  Agent agent(env.spec(), small_agent(), 0);
  EXPECT_THROW(agent.train_step(), BufferNotReady);
}

TEST(Agent, HardSyncEveryThousandSteps) {
  envs::ChainWorld env;
  Agent agent(env.spec(), small_agent(), 1);
  EXPECT_EQ(snapshot(agent.online()), snapshot(agent.target()));
  fill_buffer(agent.buffer(), 200, 1);
  const auto initial = snapshot(agent.target());
  for (int k = 1; k <= 2000; ++k) {
    const auto stats = agent.train_step();
    ASSERT_TRUE(std::isfinite(stats.total));
    if (k == 999) {
      EXPECT_EQ(snapshot(agent.target()), initial);
      EXPECT_NE(snapshot(agent.online()), initial);
    }
    if (k == 1000 || k == 2000) EXPECT_EQ(snapshot(agent.target()), snapshot(agent.online()));
    if (k == 1001) EXPECT_NE(snapshot(agent.target()), snapshot(agent.online()));
    if (k == 1999) EXPECT_NE(snapshot(agent.target()), snapshot(agent.online()));
  }
  EXPECT_EQ(agent.optimization_steps(), 2000u);
}

TEST(Agent, DefaultConfigLossesStayFinite) {
  envs::ChainWorld env;
  AgentConfig cfg;
  cfg.replay_start = 100;
  Agent agent(env.spec(), cfg, 2);
  fill_buffer(agent.buffer(), 500, 2);
  for (int k = 0; k < 1000; ++k) {
    const auto s = agent.train_step();
    for (double v : {s.qr, s.cal_z, s.nll, s.reg, s.cal_el, s.interval, s.total}) {
      ASSERT_TRUE(std::isfinite(v)) << "step " << k;
    }
  }
}

TEST(Agent, UpdateFrequencyOneTrainsOncePerFrame) {
  envs::ChainWorld env;
  Agent agent(env.spec(), small_agent(), 3);
  fill_buffer(agent.buffer(), 50, 3);
  std::size_t frames = 0;
  const auto before = agent.optimization_steps();
  const auto r = run_episode(env, agent, RunMode::train, 11, frames, 1000000);
  EXPECT_EQ(frames, r.steps);
  EXPECT_EQ(agent.optimization_steps() - before, r.steps);
  EXPECT_EQ(r.train_steps, r.steps);
}

TEST(Agent, EvalModeLeavesBufferAlone) {
  envs::ChainWorld env;
  Agent agent(env.spec(), small_agent(), 4);
  fill_buffer(agent.buffer(), 30, 4);
  std::size_t frames = 0;
  const auto size = agent.buffer().size();
  const auto steps = agent.optimization_steps();
  const auto r = run_episode(env, agent, RunMode::eval, 5, frames, 0);
  EXPECT_EQ(agent.buffer().size(), size);
  EXPECT_EQ(agent.optimization_steps(), steps);
  EXPECT_EQ(r.psi_ep.size(), r.steps);
}

TEST(Agent, RunEpisodeIsDeterministic) {
  envs::ChainWorld env;
  const auto play = [&] {
    Agent agent(env.spec(), small_agent(), 9);
    std::vector<double> returns;
    std::size_t frames = 0;
    for (int ep = 0; ep < 5; ++ep) {
      returns.push_back(run_episode(env, agent, RunMode::train, ep, frames, 1000000).episode_return);
    }
    return std::pair{returns, snapshot(agent.online())};
  };
  EXPECT_EQ(play(), play());
}

TEST(Agent, TrainingFrameBudgetIsRespected) {
  envs::ChainWorld env;
  Agent agent(env.spec(), small_agent(), 5);
  const auto summary = train(env, agent, 300, 2, 5);
  EXPECT_EQ(summary.frames, 300u);
  EXPECT_EQ(summary.eval.episodes, 2u);
  ASSERT_FALSE(summary.records.empty());
  EXPECT_EQ(summary.records.back().step, 300u);
}

TEST(Agent, AlternatingModeUpdatesOneHeadPerStep) {
  envs::ChainWorld env;
  auto cfg = small_agent();
  cfg.mode = OptimizationMode::alternating;
  Agent agent(env.spec(), cfg, 6);
  fill_buffer(agent.buffer(), 50, 6);
  const auto head = [&](const std::string& prefix) {
    std::vector<std::vector<double>> out;
    for (const auto* p : agent.online().parameters()) {
      if (p->name.rfind(prefix, 0) == 0) out.emplace_back(p->value.values().begin(), p->value.values().end());
    }
    return out;
  };
  const auto ev0 = head("evidential_head");
  const auto act0 = head("action_head");
  ASSERT_FALSE(ev0.empty());
  agent.train_step();  // quantile objective only
  EXPECT_EQ(head("evidential_head"), ev0);
  EXPECT_NE(head("action_head"), act0);
  agent.train_step();  // evidential objective only
  EXPECT_NE(head("evidential_head"), ev0);
}

TEST(AgentConfig, DefaultsAndValidation) {
  AgentConfig c;
  EXPECT_EQ(c.batch_size, 32u);
  EXPECT_EQ(c.gamma_discount, 0.99);
  EXPECT_EQ(c.target_sync_period, 1000u);
  EXPECT_EQ(c.update_frequency, 1u);
  EXPECT_EQ(c.loss.lambda_reg, 0.5);
  EXPECT_EQ(c.loss.lambda_cal, 0.5);
  EXPECT_EQ(c.lambda_al, 0.0);
  EXPECT_NO_THROW(c.validate());
  c.num_quantiles = 1;
  EXPECT_THROW(c.validate(), ConfigError);
  c = AgentConfig{};
  c.lambda_ep = -1;
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_EQ(parse_optimization_mode("alternating"), OptimizationMode::alternating);
  EXPECT_THROW(parse_optimization_mode("bogus"), ConfigError);
}
