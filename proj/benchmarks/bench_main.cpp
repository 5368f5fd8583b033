#include <benchmark/benchmark.h>

#include <vector>

#include "dtrbench/eval/protocol.hpp"
#include "dtrbench/nn/dense_net.hpp"
#include "dtrbench/risk/bootstrap.hpp"
#include "dtrbench/rl/gae.hpp"
#include "dtrbench/rl/squash.hpp"
#include "dtrbench/sim/environment.hpp"
#include "dtrbench/sim/scenario.hpp"

using namespace dtrbench;

static void BM_EnvEpisode(benchmark::State& state) {
  sim::GlucoseEnv env(sim::default_scenario(sim::Cohort::Adolescent, 0));
  std::uint64_t seed = 0;
  for (auto _ : state) {
    env.reset(seed++);
    while (!env.done()) env.step(0.3);
    benchmark::DoNotOptimize(env.state().g);
  }
  state.SetItemsProcessed(state.iterations() * sim::kStepsPerEpisode);
}
BENCHMARK(BM_EnvEpisode);

static void BM_ForwardBackward(benchmark::State& state) {
  const auto batch = state.range(0);
  const auto net = nn::DenseNet::init_standard({48, 64, 64, 11}, 1);
  const Eigen::MatrixXd x = Eigen::MatrixXd::Random(48, batch);
  const Eigen::MatrixXd g = Eigen::MatrixXd::Random(11, batch);
  for (auto _ : state) {
    const auto cache = net.forward_batch(x);
    auto grads = net.backward(cache, g);
    benchmark::DoNotOptimize(grads.layers[0].weight.data());
  }
  state.SetItemsProcessed(state.iterations() * batch);
}
BENCHMARK(BM_ForwardBackward)->Arg(1)->Arg(128);

static void BM_Bootstrap(benchmark::State& state) {
  std::vector<double> xs(static_cast<std::size_t>(state.range(0)));
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i] = static_cast<double>(i % 17);
  for (auto _ : state) benchmark::DoNotOptimize(risk::bootstrap_ci(xs, 1000, 1));
}
BENCHMARK(BM_Bootstrap)->Arg(80)->Arg(240);

static void BM_Gae(benchmark::State& state) {
  const std::size_t n = 192;
  std::vector<double> r(n, 0.9), v(n, 50.0), nv(n, 50.0);
  auto end = std::make_unique<bool[]>(n);
  for (std::size_t i = 0; i < n; ++i) end[i] = i % 64 == 63;
  for (auto _ : state) benchmark::DoNotOptimize(rl::gae(r, v, nv, std::span<const bool>(end.get(), n), 0.99, 0.95));
}
BENCHMARK(BM_Gae);

static void BM_TanhLogProb(benchmark::State& state) {
  double a = 0.01;
  for (auto _ : state) {
    benchmark::DoNotOptimize(rl::log_prob_tanh(a, -1.4, 0.5));
    a = a > 8.9 ? 0.01 : a + 0.013;
  }
}
BENCHMARK(BM_TanhLogProb);

static void BM_ProtocolScripted(benchmark::State& state) {
  eval::EvalProtocol p;
  p.workers = 1;
  const auto pol = eval::resolve_policy(eval::PolicySpec{eval::ScriptedPolicySpec{eval::ScriptedKind::Random012}});
  for (auto _ : state) benchmark::DoNotOptimize(eval::run_protocol(*pol, p));
  state.SetItemsProcessed(state.iterations() * 240);
}
BENCHMARK(BM_ProtocolScripted)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
