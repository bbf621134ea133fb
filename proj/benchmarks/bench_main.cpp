#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "armlet/entmax.hpp"
#include "armlet/metrics.hpp"
#include "armlet/model.hpp"
#include "armlet/synthetic.hpp"

using namespace armlet;

namespace {

std::vector<Instance> random_batch(std::size_t m, std::size_t card, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Instance> xs(n);
  for (auto& x : xs) {
    x.features.resize(m);
    for (auto& f : x.features) f = {static_cast<std::int32_t>(rng.below(card)), 1.0};
  }
  return xs;
}

// Per-tuple eval cost at K=4, o=64, n_e=10 as the field count grows.
void BM_ArmPredict(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  auto schema = std::make_shared<const Schema>(synthetic_schema(std::vector<std::size_t>(m, 10)));
  ArmConfig cfg;
  cfg.heads = 4;
  cfg.neurons = 64;
  cfg.n_e = 10;
  const auto model = make_model(ModelKind::kArm, cfg, schema, 1);
  const auto xs = random_batch(m, 10, 64, 2);
  std::vector<double> out(xs.size());
  for (auto _ : state) {
    model->predict(xs, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}
BENCHMARK(BM_ArmPredict)->RangeMultiplier(2)->Range(4, 64)->Unit(benchmark::kMillisecond);

void BM_ArmTrainStep(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  auto schema = std::make_shared<const Schema>(synthetic_schema(std::vector<std::size_t>(m, 10)));
  ArmConfig cfg;
  auto model = make_model(ModelKind::kArm, cfg, schema, 1);
  auto xs = random_batch(m, 10, 32, 3);
  for (std::size_t i = 0; i < xs.size(); ++i) xs[i].label = static_cast<int>(i % 2);
  Rng rng(4);
  for (auto _ : state) {
    model->params().zero_grad();
    model->begin_batch();
    double sum = 0.0;
    for (const auto& x : xs)
      sum += model->forward_backward(x, rng, [&](double l) { return (sigmoid(l) - x.label) / 32.0; });
    benchmark::DoNotOptimize(sum);
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(xs.size()));
}
BENCHMARK(BM_ArmTrainStep)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Entmax(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const double alpha = static_cast<double>(state.range(1)) / 10.0;
  Rng rng(5);
  std::vector<double> z(n), p(n);
  for (auto& v : z) v = rng.normal(0.0, 1.0);
  for (auto _ : state) {
    entmax_into(z, alpha, p);
    benchmark::DoNotOptimize(p.data());
  }
}
BENCHMARK(BM_Entmax)->ArgsProduct({{8, 64}, {10, 15, 17, 20}});

void BM_EntmaxBisect(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(6);
  std::vector<double> z(n);
  for (auto& v : z) v = rng.normal(0.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(entmax_bisect(z, 1.7));
}
BENCHMARK(BM_EntmaxBisect)->Arg(8)->Arg(64);

void BM_Auc(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(7);
  std::vector<double> s(n);
  std::vector<int> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    s[i] = rng.normal(0.0, 1.0);
    y[i] = static_cast<int>(rng.below(2));
  }
  for (auto _ : state) benchmark::DoNotOptimize(auc(s, y));
}
BENCHMARK(BM_Auc)->Arg(1 << 12)->Arg(1 << 16);

}  // namespace

BENCHMARK_MAIN();
