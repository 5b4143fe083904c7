#include <benchmark/benchmark.h>

#include <random>

#include "ceqr/agent/agent.hpp"
#include "ceqr/envs/chain_world.hpp"
#include "ceqr/envs/trap_maze.hpp"
#include "ceqr/losses.hpp"
#include "ceqr/nnet/qnetwork.hpp"
#include "ceqr/objectives.hpp"

using namespace ceqr;

namespace {

nnet::Tensor random_states(const nnet::QNetworkConfig& c, std::size_t batch) {
  std::mt19937_64 rng(1);
  nnet::Tensor t({batch, c.height, c.width, c.channels});
  for (auto& v : t.data()) v = rng() % 4 == 0 ? 1.0 : 0.0;
  return t;
}

nnet::QNetworkConfig maze_net() {
  nnet::QNetworkConfig c;
  c.num_actions = 4;
  return c;
}

void BM_Forward(benchmark::State& state) {
  const auto c = maze_net();
  nnet::QNetwork net(c);
  const auto x = random_states(c, static_cast<std::size_t>(state.range(0)));
  const auto heads = state.range(1) ? nnet::Heads::both : nnet::Heads::action_only;
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(x, heads));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Args({1, 1})->Args({32, 0})->Args({32, 1});

void BM_ForwardBackward(benchmark::State& state) {
  const auto c = maze_net();
  nnet::QNetwork net(c);
  const auto x = random_states(c, 32);
  const auto probe = net.forward(x);
  const nnet::Tensor gq(probe.quantiles.shape(), 0.01), ge(probe.evidential.shape(), 0.01);
  for (auto _ : state) {
    net.forward(x);
    net.zero_grad();
    net.backward(gq, ge);
  }
}
BENCHMARK(BM_ForwardBackward);

void BM_QrLoss(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::normal_distribution<double> n01;
  std::vector<double> theta(n), target(n), grad(n);
  for (auto& v : theta) v = n01(rng);
  for (auto& v : target) v = n01(rng);
  const auto levels = losses::QuantileLevels::midpoints(n);
  for (auto _ : state) {
    benchmark::DoNotOptimize(losses::qr_loss(theta, target, levels.values(), 1.0, grad));
  }
}
BENCHMARK(BM_QrLoss)->Arg(50)->Arg(200);

void BM_ZLoss(benchmark::State& state) {
  const std::size_t batch = 32, n = 50;
  std::mt19937_64 rng(3);
  std::normal_distribution<double> n01;
  std::vector<double> pred(batch * n), y(batch * n), grad(batch * n);
  for (auto& v : pred) v = n01(rng);
  for (auto& v : y) v = n01(rng);
  const auto levels = losses::QuantileLevels::midpoints(n);
  const losses::LossWeights w;
  for (auto _ : state) {
    benchmark::DoNotOptimize(objectives::z_loss(losses::BatchView(pred, batch, n),
                                                losses::BatchView(y, batch, n), levels, w, grad));
  }
}
BENCHMARK(BM_ZLoss);

void BM_ElLoss(benchmark::State& state) {
  const std::size_t batch = 32, n = 50;
  std::mt19937_64 rng(4);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> pos(0.5, 2.0);
  objectives::NigBatch p(batch, n), grad(batch, n);
  for (std::size_t k = 0; k < p.gamma.size(); ++k) {
    p.gamma[k] = n01(rng);
    p.v[k] = pos(rng);
    p.alpha[k] = 1.0 + pos(rng);
    p.beta[k] = pos(rng);
  }
  std::vector<double> y(batch * n);
  for (auto& v : y) v = n01(rng);
  const losses::LossWeights w;
  for (auto _ : state) {
    benchmark::DoNotOptimize(objectives::el_loss(p, losses::BatchView(y, batch, n), w, &grad));
  }
}
BENCHMARK(BM_ElLoss);

void BM_TrainStep(benchmark::State& state) {
  envs::TrapMaze env;
  agent::AgentConfig cfg;
  cfg.replay_start = 256;
  agent::Agent learner(env.spec(), cfg, 0);
  std::size_t frames = 0;
  for (std::uint64_t ep = 0; !learner.buffer().ready(); ++ep) {
    agent::run_episode(env, learner, agent::RunMode::train, ep, frames, SIZE_MAX);
  }
  for (auto _ : state) benchmark::DoNotOptimize(learner.train_step());
}
BENCHMARK(BM_TrainStep)->Unit(benchmark::kMicrosecond);

void BM_ChainEpisodeEval(benchmark::State& state) {
  envs::ChainWorld env;
  agent::Agent learner(env.spec(), agent::AgentConfig{}, 0);
  std::size_t frames = 0;
  std::uint64_t seed = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(agent::run_episode(env, learner, agent::RunMode::eval, seed++, frames, 0));
  }
}
BENCHMARK(BM_ChainEpisodeEval)->Unit(benchmark::kMicrosecond);

}  // namespace
BENCHMARK_MAIN();
