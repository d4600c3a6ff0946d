// Serial reference vs OpenMP kernels on square disks of growing size.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "apex/disk.hpp"
#include "apex/kernels.hpp"

using namespace apex;

namespace {

Disk make_disk(std::uint32_t side) {
  DiskGeometry g;
  g.rows = side;
  g.cols = side;
  Disk d(g, {4, 7, 1, 9});
  std::mt19937_64 rng(side);
  for (BlockAddress a = 0; a < d.block_count(); ++a) {
    d.set_factors(a, {rng() % 8, rng() % 32, 0.0, static_cast<int>(rng() % 2)});
  }
  return d;
}

const Disk& disk_for(std::uint32_t side) {
  static std::vector<std::pair<std::uint32_t, Disk>> cache;
  for (const auto& [s, d] : cache) {
    if (s == side) return d;
  }
  cache.emplace_back(side, make_disk(side));
  return cache.back().second;
}

template <auto Kernel>
void BM_base_priorities(benchmark::State& state) {
  const auto& d = disk_for(static_cast<std::uint32_t>(state.range(0)));
  std::vector<double> out(d.block_count());
  for (auto _ : state) {
    Kernel(d.blocks(), d.hyperparams(), out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.block_count()));
}

template <auto Kernel>
void BM_spatial_factors(benchmark::State& state) {
  auto g = disk_for(static_cast<std::uint32_t>(state.range(0))).geometry();
  const auto& d = disk_for(g.rows);
  g.neighborhood = state.range(1) == 0 ? Neighborhood::grid_row() : Neighborhood::contiguous(4);
  std::vector<double> base(d.block_count()), out(d.block_count());
  kernels::base_priorities_serial(d.blocks(), d.hyperparams(), base);
  for (auto _ : state) {
    Kernel(g, d.blocks(), base, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.block_count()));
}

template <auto Kernel>
void BM_priority_keys(benchmark::State& state) {
  const auto& d = disk_for(static_cast<std::uint32_t>(state.range(0)));
  std::vector<double> out(d.block_count());
  for (auto _ : state) {
    Kernel(d.blocks(), d.hyperparams(), true, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(d.block_count()));
}

void sides(benchmark::internal::Benchmark* b) {
  for (int side : {64, 256, 1024}) b->Arg(side);
}

void sides_and_neighborhoods(benchmark::internal::Benchmark* b) {
  for (int side : {64, 256, 1024}) {
    b->Args({side, 0});
    b->Args({side, 1});
  }
}

}  // namespace

BENCHMARK(BM_base_priorities<kernels::base_priorities_serial>)->Name("base_priorities/serial")->Apply(sides);
BENCHMARK(BM_base_priorities<kernels::base_priorities_parallel>)->Name("base_priorities/omp")->Apply(sides)->UseRealTime();
BENCHMARK(BM_spatial_factors<kernels::spatial_factors_serial>)->Name("spatial_factors/serial")->Apply(sides_and_neighborhoods);
BENCHMARK(BM_spatial_factors<kernels::spatial_factors_parallel>)->Name("spatial_factors/omp")->Apply(sides_and_neighborhoods)->UseRealTime();
BENCHMARK(BM_priority_keys<kernels::priority_keys_serial>)->Name("priority_keys/serial")->Apply(sides);
BENCHMARK(BM_priority_keys<kernels::priority_keys_parallel>)->Name("priority_keys/omp")->Apply(sides)->UseRealTime();

BENCHMARK_MAIN();
