// Parallel kernels against their single-threaded references. The serial
// compute_map reference goes through compute_pixel per pixel, so the gap at
// one thread is the cost of that generic path; the thread argument isolates
// the OpenMP scaling.

#include <benchmark/benchmark.h>
#include <omp.h>

#include <map>
#include <vector>

#include "msi/indices.hpp"
#include "msi/synthgen.hpp"
#include "msi/threshold.hpp"

namespace {

using R = msi::SpectralRole;

msi::BandStack make_stack(std::size_t side) {
  msi::SplitMix64 rng(7);
  std::vector<msi::Band> bands;
  for (R r : {R::Blue, R::Green, R::Red, R::RedEdge, R::Nir, R::Swir1, R::Swir2}) {
    msi::Band b{r, std::string(msi::to_string(r)), std::vector<float>(side * side)};
    for (auto& v : b.data) v = static_cast<float>(0.01 + 0.99 * rng.uniform());
    bands.push_back(std::move(b));
  }
  msi::GridMeta meta;
  meta.width = meta.height = side;
  return msi::BandStack(meta, std::move(bands));
}

const msi::BandStack& stack_for(std::size_t side) {
  static std::map<std::size_t, msi::BandStack> cache;
  auto it = cache.find(side);
  if (it == cache.end()) it = cache.emplace(side, make_stack(side)).first;
  return it->second;
}

const msi::IndexCatalog& catalog() {
  static const msi::IndexCatalog cat = msi::IndexCatalog::standard();
  return cat;
}

// Arg 0: side length. Arg 1: index (0 NDVI, 1 EVI, 2 MSAVI). Arg 2 of the
// parallel runs: OpenMP threads.
const char* kIds[] = {"NDVI", "EVI", "MSAVI"};

void BM_ComputeMapParallel(benchmark::State& state) {
  const auto& stack = stack_for(static_cast<std::size_t>(state.range(0)));
  const auto& spec = catalog().at(kIds[state.range(1)]);
  omp_set_num_threads(static_cast<int>(state.range(2)));
  for (auto _ : state) benchmark::DoNotOptimize(msi::compute_map(spec, stack, {}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
  state.SetLabel(kIds[state.range(1)]);
}

void BM_ComputeMapSerial(benchmark::State& state) {
  const auto& stack = stack_for(static_cast<std::size_t>(state.range(0)));
  const auto& spec = catalog().at(kIds[state.range(1)]);
  for (auto _ : state) benchmark::DoNotOptimize(msi::compute_map_serial(spec, stack, {}));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
  state.SetLabel(kIds[state.range(1)]);
}

struct MapAndMask {
  msi::IndexMap map;
  msi::FeatureMask mask;
};

const MapAndMask& histogram_input(std::size_t side) {
  static std::map<std::size_t, MapAndMask> cache;
  auto it = cache.find(side);
  if (it == cache.end()) {
    MapAndMask mm;
    mm.map = msi::normalize_map(msi::compute_map(catalog().at("NDVI"), stack_for(side), {}));
    mm.mask.meta = mm.map.meta;
    msi::SplitMix64 rng(3);
    mm.mask.data.resize(side * side);
    for (auto& v : mm.mask.data) v = rng.uniform() < 0.5 ? 1 : 0;
    it = cache.emplace(side, std::move(mm)).first;
  }
  return it->second;
}

void BM_HistogramParallel(benchmark::State& state) {
  const auto& in = histogram_input(static_cast<std::size_t>(state.range(0)));
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(msi::masked_histogram(in.map, in.mask, 200));
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

void BM_HistogramSerial(benchmark::State& state) {
  const auto& in = histogram_input(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(msi::masked_histogram_serial(in.map, in.mask, 200));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0) * state.range(0));
}

const long long kMaxThreads = omp_get_max_threads();

}  // namespace

BENCHMARK(BM_ComputeMapSerial)->ArgsProduct({{512, 2048}, {0, 1, 2}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ComputeMapParallel)
    ->ArgsProduct({{512, 2048}, {0, 1, 2}, {1, kMaxThreads}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();
BENCHMARK(BM_HistogramSerial)->Arg(512)->Arg(2048)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_HistogramParallel)
    ->ArgsProduct({{512, 2048}, {1, kMaxThreads}})
    ->Unit(benchmark::kMillisecond)
    ->UseRealTime();

BENCHMARK_MAIN();
