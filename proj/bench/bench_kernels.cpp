// Serial reference vs OpenMP kernels.
//   ./bench_kernels --benchmark_filter=Batch

#include <benchmark/benchmark.h>

#include <vector>

#include "fpld/quant.hpp"
#include "fpld/rng.hpp"
#include "fpld/sim.hpp"

namespace {

std::vector<double> make_rows(std::size_t rows, std::size_t dim) {
  const fpld::rng::StreamKey key{7, fpld::rng::Purpose::kTest, 0, 0, 0};
  std::vector<double> out(rows * dim);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = 0.5 * fpld::rng::normal(key, i);
  return out;
}

void BM_BatchSerial(benchmark::State& state) {
  const auto rows = make_rows(static_cast<std::size_t>(state.range(0)), 256);
  const auto spec = fpld::make_quantizer(1.0, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fpld::quantize_batch_serial(spec, rows, 256, {1, 0, 0, 0}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(rows.size()));
}

void BM_BatchOpenMP(benchmark::State& state) {
  const auto rows = make_rows(static_cast<std::size_t>(state.range(0)), 256);
  const auto spec = fpld::make_quantizer(1.0, 4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fpld::quantize_batch(spec, rows, 256, {1, 0, 0, 0}));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(rows.size()));
}

fpld::SimConfig seed_config() {
  fpld::SimConfig cfg;
  cfg.K = 4;
  cfg.n = fpld::kExactLogits;
  for (std::uint64_t s = 1; s <= 8; ++s) cfg.seeds.push_back(s);
  return cfg;
}

void BM_SeedsSerial(benchmark::State& state) {
  const auto cfg = seed_config();
  const auto truth = fpld::gen_truth(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(fpld::run_seeds_serial(cfg, truth));
}

void BM_SeedsOpenMP(benchmark::State& state) {
  const auto cfg = seed_config();
  const auto truth = fpld::gen_truth(cfg);
  for (auto _ : state) benchmark::DoNotOptimize(fpld::run_seeds(cfg, truth));
}

}  // namespace

BENCHMARK(BM_BatchSerial)->Arg(64)->Arg(1024);
BENCHMARK(BM_BatchOpenMP)->Arg(64)->Arg(1024);
BENCHMARK(BM_SeedsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_SeedsOpenMP)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
