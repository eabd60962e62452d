#include <benchmark/benchmark.h>

#include <vector>

#include "noxcast/dataset.hpp"
#include "noxcast/eval.hpp"
#include "noxcast/nn.hpp"
#include "noxcast/random.hpp"
#include "noxcast/train.hpp"

using namespace noxcast;

namespace {

struct Batch {
  std::vector<std::vector<double>> windows;
  std::vector<double> targets;
  std::vector<nn::SampleRef> refs;
};

Batch make_batch(std::size_t n, std::size_t window) {
  Batch b;
  Rng rng(1);
  for (std::size_t k = 0; k < n; ++k) {
    std::vector<double> w(window);
    for (double& x : w) x = rng.uniform();
    b.windows.push_back(std::move(w));
    b.targets.push_back(rng.uniform());
  }
  for (std::size_t k = 0; k < n; ++k) b.refs.push_back({b.windows[k], b.targets[k]});
  return b;
}

void BM_CellForward(benchmark::State& state) {
  const auto H = static_cast<std::size_t>(state.range(0));
  const auto params = nn::init_params(H, 1, 3);
  const auto s = nn::LstmState::zeros(H);
  const std::vector<double> x{0.5};
  for (auto _ : state) benchmark::DoNotOptimize(nn::cell_forward(params, x, s));
}
BENCHMARK(BM_CellForward)->Arg(16)->Arg(64);

void BM_Predict(benchmark::State& state) {
  const auto params = nn::init_params(64, 1, 3);
  const auto batch = make_batch(1, 7);
  for (auto _ : state) benchmark::DoNotOptimize(nn::predict(params, batch.windows[0]));
}
BENCHMARK(BM_Predict);

// One mini-batch of the default configuration: H = 64, w = 7, batch 64.
void BM_LossAndGradients(benchmark::State& state) {
  const auto threads = static_cast<std::size_t>(state.range(0));
  const auto params = nn::init_params(64, 1, 3);
  const auto batch = make_batch(64, 7);
  for (auto _ : state) benchmark::DoNotOptimize(nn::loss_and_gradients(params, batch.refs, threads));
  state.SetItemsProcessed(state.iterations() * 64);
}
BENCHMARK(BM_LossAndGradients)->Arg(1)->Arg(2)->Unit(benchmark::kMicrosecond);

void BM_TrainEpoch(benchmark::State& state) {
  std::vector<double> series(1000);
  Rng rng(5);
  for (double& v : series) v = rng.uniform();
  const auto ds = dataset::build_dataset(series, 7, 1, 0.3);
  train::TrainConfig cfg;
  cfg.epochs = 1;
  const auto params = nn::init_params(16, 1, 3);
  for (auto _ : state) benchmark::DoNotOptimize(train::train(params, ds, cfg));
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

void BM_Entropy(benchmark::State& state) {
  std::vector<double> values(static_cast<std::size_t>(state.range(0)));
  Rng rng(7);
  for (double& v : values) v = rng.uniform();
  for (auto _ : state) benchmark::DoNotOptimize(eval::shannon_entropy(values, 1024));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Entropy)->Arg(41924)->Arg(1'000'000)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
