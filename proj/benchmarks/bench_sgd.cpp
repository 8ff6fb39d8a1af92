#include <benchmark/benchmark.h>

#include <random>

#include "ispsim/sgd.hpp"

using namespace ispsim;

namespace {

ModelConfig mnist_model() {
  ModelConfig m;
  m.input_dim = 784;
  m.num_classes = 10;
  m.sigmoid_mode = SigmoidMode::Approximate;
  return m;
}

PageMinibatch random_batch(const ModelConfig& model, int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> label(0, model.num_classes - 1);
  PageMinibatch mb;
  mb.samples.resize(static_cast<std::size_t>(samples));
  for (auto& s : mb.samples) {
    s.features.resize(static_cast<std::size_t>(model.input_dim));
    for (auto& f : s.features) f = byte(rng) / 255.0;
    s.label = label(rng);
  }
  return mb;
}

}  // namespace

static void BM_MinibatchGradient(benchmark::State& state) {
  const auto model = mnist_model();
  const auto batch = random_batch(model, 10, 1);
  ParamVector params(model.param_count());
  for (auto _ : state) {
    auto delta = accumulate_minibatch_gradient(params, batch, 0.1, model);
    benchmark::DoNotOptimize(delta);
  }
  state.SetItemsProcessed(state.iterations() * 10);
}
BENCHMARK(BM_MinibatchGradient)->Unit(benchmark::kMicrosecond);

static void BM_Forward(benchmark::State& state) {
  const auto model = mnist_model();
  const auto batch = random_batch(model, 1, 2);
  ParamVector params(model.param_count());
  for (auto _ : state) {
    auto scores = forward(params, batch.samples[0].features, model);
    benchmark::DoNotOptimize(scores);
  }
}
BENCHMARK(BM_Forward)->Unit(benchmark::kMicrosecond);

static void BM_SigmoidApprox(benchmark::State& state) {
  double t = -8.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(sigmoid_approx(t));
    t += 1e-4;
    if (t > 8.0) t = -8.0;
  }
}
BENCHMARK(BM_SigmoidApprox);

static void BM_EvaluateAccuracy(benchmark::State& state) {
  const auto model = mnist_model();
  std::vector<Sample> test;
  for (int i = 0; i < 512; ++i) {
    test.push_back(random_batch(model, 1, static_cast<std::uint64_t>(i)).samples[0]);
  }
  ParamVector params(model.param_count());
  for (auto _ : state) {
    benchmark::DoNotOptimize(evaluate_accuracy(params, test, model));
  }
  state.SetItemsProcessed(state.iterations() * 512);
}
BENCHMARK(BM_EvaluateAccuracy)->Unit(benchmark::kMillisecond);
