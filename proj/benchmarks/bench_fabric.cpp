#include <benchmark/benchmark.h>

#include <random>

#include "ispsim/algorithms.hpp"
#include "ispsim/dataset.hpp"
#include "ispsim/fabric.hpp"

using namespace ispsim;

namespace {

// simulator throughput on a small in-memory workload (16 features, 3 classes)
struct Workload {
  ModelConfig model;
  std::vector<PackedPage> pages;
  NandGeometry geom;
};

Workload make_workload(std::size_t samples) {
  Workload w;
  w.model.input_dim = 16;
  w.model.num_classes = 3;
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> label(0, 2);
  std::vector<Sample> data(samples);
  for (auto& s : data) {
    s.features.resize(16);
    for (auto& f : s.features) f = byte(rng) / 255.0;
    s.label = label(rng);
  }
  w.pages = pack_pages(data, 256, 16);
  w.geom = geometry_for_dataset(static_cast<std::int64_t>(w.pages.size()), 4, 256, 16);
  return w;
}

}  // namespace

static void BM_EventQueue(benchmark::State& state) {
  // raw schedule/dispatch throughput via back-to-back page reads
  class Loop : public AlgorithmDriver {
   public:
    explicit Loop(int reads) : remaining_(reads) {}
    void start(Fabric& f) override { f.slave_read_page(0, {0, 0, 0}); }
    void on_event(Fabric& f, const Event&) override {
      if (--remaining_ > 0) f.slave_read_page(0, {0, 0, 0});
    }
    int remaining_;
  };
  for (auto _ : state) {
    NandGeometry g;
    g.num_channels = 1;
    g.blocks_per_channel = 1;
    g.pages_per_block = 1;
    g.page_size_bytes = 64;
    NandArray nand(g, NandTiming{});
    Fabric fabric(nand, CostModel{}, 8);
    Loop driver(10'000);
    auto log = fabric.run(driver, StopCondition{}, nullptr, SimDuration{});
    benchmark::DoNotOptimize(log);
  }
  state.SetItemsProcessed(state.iterations() * 10'000);
}
BENCHMARK(BM_EventQueue)->Unit(benchmark::kMillisecond);

static void BM_SyncEpoch(benchmark::State& state) {
  const auto w = make_workload(960);
  for (auto _ : state) {
    NandArray nand(w.geom, NandTiming{});
    const auto layout = stripe_across_channels(w.pages, w.geom, 1, false);
    preload_nand(layout, w.pages, nand);
    Fabric fabric(nand, CostModel{}, w.model.param_count());
    AlgorithmConfig algo;
    algo.kind = AlgorithmKind::Synchronous;
    algo.hyper.learning_rate = 0.05;
    algo.max_epochs = 1;
    auto log = run_algorithm(fabric, layout, w.model, algo, StopCondition{}, nullptr,
                             SimDuration{});
    benchmark::DoNotOptimize(log);
  }
}
BENCHMARK(BM_SyncEpoch)->Unit(benchmark::kMillisecond);

static void BM_EasgdEpoch(benchmark::State& state) {
  const auto w = make_workload(960);
  for (auto _ : state) {
    NandArray nand(w.geom, NandTiming{});
    const auto layout = stripe_across_channels(w.pages, w.geom, 1, false);
    preload_nand(layout, w.pages, nand);
    Fabric fabric(nand, CostModel{}, w.model.param_count());
    AlgorithmConfig algo;
    algo.kind = AlgorithmKind::Easgd;
    algo.hyper.learning_rate = 0.05;
    algo.hyper.moving_rate = 0.01;
    algo.max_epochs = 1;
    auto log = run_algorithm(fabric, layout, w.model, algo, StopCondition{}, nullptr,
                             SimDuration{});
    benchmark::DoNotOptimize(log);
  }
}
BENCHMARK(BM_EasgdEpoch)->Unit(benchmark::kMillisecond);
