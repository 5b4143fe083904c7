#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "ceqr/envs/factory.hpp"
#include "ceqr/errors.hpp"

using namespace ceqr;
using namespace ceqr::envs;

namespace {

bool is_binary(const nnet::Tensor& t) {
  for (double v : t.values()) {
    if (v != 0.0 && v != 1.0) return false;
  }
  return true;
}

// Breadth-first shortest path length from S to G through walkable cells.
int shortest_path(const TrapMazeConfig& cfg) {
  TrapMaze maze(cfg);
  maze.reset(0);
  const int h = static_cast<int>(cfg.layout.size());
  const int w = static_cast<int>(cfg.layout[0].size());
  std::vector<int> dist(h * w, -1);
  std::deque<std::pair<int, int>> queue{{static_cast<int>(maze.row()), static_cast<int>(maze.col())}};
  dist[queue.front().first * w + queue.front().second] = 0;
  while (!queue.empty()) {
    auto [r, c] = queue.front();
    queue.pop_front();
    if (cfg.layout[r][c] == 'G') return dist[r * w + c];
    const int dr[] = {-1, 0, 1, 0}, dc[] = {0, 1, 0, -1};
    for (int k = 0; k < 4; ++k) {
      const int nr = r + dr[k], nc = c + dc[k];
      if (nr < 0 || nc < 0 || nr >= h || nc >= w || dist[nr * w + nc] >= 0) continue;
      if (!maze.is_walkable(nr, nc)) continue;
      dist[nr * w + nc] = dist[r * w + c] + 1;
      queue.emplace_back(nr, nc);
    }
  }
  return -1;
}

}  // namespace

TEST(ChainWorld, ResetIsDeterministicAtPositionZero) {
  ChainWorld env;
  const auto a = env.reset(3);
  const auto b = env.reset(3);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.shape(), (nnet::Shape{1, 10, 1}));
  EXPECT_EQ(a[0], 1.0);
  EXPECT_EQ(env.position(), 0u);
  EXPECT_TRUE(is_binary(a));
}

TEST(ChainWorld, AlwaysRightReachesGoalInNineSteps) {
  ChainWorld env;
  env.reset(0);
  double ret = 0.0;
  std::size_t steps = 0;
  StepResult r;
  do {
    r = env.step(ChainWorld::kRight);
    ret += r.reward;
    ++steps;
  } while (!r.done);
  EXPECT_DOUBLE_EQ(ret, 10.0);
  EXPECT_EQ(steps, 9u);
  EXPECT_EQ(r.info.count("goal"), 1u);
}

TEST(ChainWorld, LeftPaysSmallRewardAndTruncates) {
  ChainWorldConfig cfg;
  cfg.max_episode_steps = 5;
  ChainWorld env(cfg);
  env.reset(0);
  StepResult r;
  for (int k = 0; k < 5; ++k) {
    r = env.step(ChainWorld::kLeft);
    EXPECT_DOUBLE_EQ(r.reward, 0.1);
    EXPECT_EQ(env.position(), 0u);
  }
  EXPECT_TRUE(r.done);
  EXPECT_EQ(r.info.count("truncated"), 1u);
  EXPECT_THROW(env.step(0), StateError);
}

TEST(ChainWorld, InvalidActionIsDomainError) {
  ChainWorld env;
  env.reset(0);
  EXPECT_THROW(env.step(2), DomainError);
}

TEST(TrapMaze, ResetGivesOneHotAgent) {
  TrapMaze env;
  const auto obs = env.reset(1);
  EXPECT_EQ(obs, env.reset(1));
  EXPECT_EQ(obs.shape(), (nnet::Shape{10, 10, 4}));
  EXPECT_TRUE(is_binary(obs));
  double agent = 0.0;
  for (std::size_t r = 0; r < 10; ++r) {
    for (std::size_t c = 0; c < 10; ++c) agent += obs.at({r, c, TrapMaze::agent});
  }
  EXPECT_EQ(agent, 1.0);
}

TEST(TrapMaze, HiddenPassageLooksLikeWall) {
  TrapMaze env;
  const auto obs = env.reset(0);
  EXPECT_EQ(obs.at({4, 0, TrapMaze::wall}), 1.0);
  EXPECT_TRUE(env.is_walkable(4, 0));
  EXPECT_FALSE(env.is_walkable(4, 1));
}

TEST(TrapMaze, ShortcutShortensOptimalPath) {
  TrapMazeConfig with;
  TrapMazeConfig without;
  for (auto& row : without.layout) {
    for (auto& c : row) c = c == 'H' ? '#' : c;
  }
  const int short_len = shortest_path(with);
  const int long_len = shortest_path(without);
  ASSERT_GT(short_len, 0);
  ASSERT_GT(long_len, 0);
  EXPECT_LT(short_len, long_len);
}

TEST(TrapMaze, ZeroTrapProbabilityIsDeterministic) {
  TrapMazeConfig cfg;
  cfg.trap_probability = 0.0;
  const std::vector<std::size_t> actions = {TrapMaze::up, TrapMaze::up, TrapMaze::up,
                                            TrapMaze::up, TrapMaze::up, TrapMaze::up,
                                            TrapMaze::right, TrapMaze::up};
  std::vector<double> first;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    TrapMaze env(cfg);
    env.reset(seed);
    std::vector<double> rewards;
    for (auto a : actions) rewards.push_back(env.step(a).reward);
    if (first.empty()) first = rewards;
    EXPECT_EQ(rewards, first);
  }
}

TEST(TrapMaze, TrapRewardMeanMatchesProbability) {
  TrapMazeConfig cfg;
  cfg.layout = {"S.T..G"};
  cfg.trap_probability = 0.5;
  cfg.max_episode_steps = 1000000;
  TrapMaze env(cfg);
  env.reset(42);
  env.step(TrapMaze::right);
  double total = 0.0;
  const int visits = 10000;
  for (int k = 0; k < visits; ++k) {
    const auto r = env.step(TrapMaze::right);  // onto the trap
    total += r.reward;
    env.step(TrapMaze::left);
  }
  EXPECT_NEAR(total / visits, -0.5, 0.02);
}

TEST(TrapMaze, SameSeedSameTrajectory) {
  TrapMazeConfig cfg;
  cfg.layout = {"S.T..G"};
  cfg.trap_probability = 0.5;
  const auto run = [&] {
    TrapMaze env(cfg);
    env.reset(9);
    std::vector<double> rewards;
    for (int k = 0; k < 20; ++k) {
      rewards.push_back(env.step(TrapMaze::right).reward);
      rewards.push_back(env.step(TrapMaze::left).reward);
    }
    return rewards;
  };
  EXPECT_EQ(run(), run());
}

TEST(TrapMaze, RewardsStayInDeclaredRange) {
  TrapMaze env;
  const auto range = env.reward_range();
  std::mt19937_64 rng(5);
  for (int ep = 0; ep < 20; ++ep) {
    env.reset(ep);
    StepResult r;
    do {
      r = env.step(rng() % 4);
      EXPECT_GE(r.reward, range.min);
      EXPECT_LE(r.reward, range.max);
      EXPECT_TRUE(is_binary(r.observation));
    } while (!r.done);
  }
}

TEST(TrapMaze, InvalidInputs) {
  TrapMaze env;
  env.reset(0);
  EXPECT_THROW(env.step(4), DomainError);
  TrapMazeConfig bad;
  bad.layout = {"S..", ".."};
  EXPECT_THROW(TrapMaze{bad}, ConfigError);
}

TEST(Factory, BuildsBothEnvironments) {
  EnvConfig cfg;
  EXPECT_EQ(make_environment(cfg)->name(), "chain");
  cfg.type = "trapmaze";
  EXPECT_EQ(make_environment(cfg)->spec().num_actions, 4u);
  cfg.type = "pong";
  EXPECT_THROW(make_environment(cfg), ConfigError);
}
