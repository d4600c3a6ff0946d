#include <doctest.h>

#include <omp.h>

#include <cstring>
#include <random>

#include "apex/kernels.hpp"
#include "apex/vfs.hpp"

using namespace apex;

namespace {

bool bit_equal(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

Disk random_disk(std::uint32_t rows, std::uint32_t cols, Neighborhood n, std::uint64_t seed) {
  DiskGeometry g;
  g.rows = rows;
  g.cols = cols;
  g.neighborhood = n;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> f(0, 9);
  Disk d(g, {3, 5, 2, 7});
  for (BlockAddress a = 0; a < d.block_count(); ++a) {
    d.set_factors(a, {f(rng), f(rng), static_cast<double>(f(rng)) / 3.0, static_cast<int>(f(rng) % 2)});
    if (f(rng) < 3) d.transition(a, Direction::ToUsed);
  }
  return d;
}

}  // namespace

TEST_CASE("serial and OpenMP kernels are bit-identical") {
  omp_set_num_threads(4);
  for (Neighborhood n : {Neighborhood{NeighborhoodKind::GridRow, 0}, Neighborhood{NeighborhoodKind::Contiguous, 3},
                         Neighborhood{NeighborhoodKind::None, 0}}) {
    CAPTURE(to_string(n));
    for (auto [rows, cols] : {std::pair{4u, 4u}, std::pair{128u, 128u}, std::pair{7u, 1000u}}) {
      const Disk d = random_disk(rows, cols, n, rows * 31 + cols);
      const auto blocks = d.blocks();
      const std::size_t size = blocks.size();
      std::vector<double> bs(size), bp(size), ss(size), sp(size), ks(size), kp(size);
      kernels::base_priorities_serial(blocks, d.hyperparams(), bs);
      kernels::base_priorities_parallel(blocks, d.hyperparams(), bp);
      CHECK(bit_equal(bs, bp));
      kernels::spatial_factors_serial(d.geometry(), blocks, bs, ss);
      kernels::spatial_factors_parallel(d.geometry(), blocks, bs, sp);
      CHECK(bit_equal(ss, sp));
      for (bool spatial : {true, false}) {
        kernels::priority_keys_serial(blocks, d.hyperparams(), spatial, ks);
        kernels::priority_keys_parallel(blocks, d.hyperparams(), spatial, kp);
        CHECK(bit_equal(ks, kp));
      }
    }
  }
}

TEST_CASE("grid-row kernel equals an explicit neighbor mean") {
  const Disk d = random_disk(3, 9, {NeighborhoodKind::GridRow, 0}, 2);
  const auto blocks = d.blocks();
  std::vector<double> base(blocks.size()), sf(blocks.size());
  kernels::base_priorities_serial(blocks, d.hyperparams(), base);
  kernels::spatial_factors_serial(d.geometry(), blocks, base, sf);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    if (blocks[i].state == BlockState::Used) {
      CHECK(sf[i] == 0.0);
      continue;
    }
    double sum = 0.0;
    const std::size_t row = i / 9;
    for (std::size_t c = 0; c < 9; ++c) {
      if (row * 9 + c != i) sum += base[row * 9 + c];
    }
    CHECK(sf[i] == doctest::Approx(sum / 8.0).epsilon(1e-12));
  }
}

TEST_CASE("single-column grid has no row neighbors") {
  const Disk d = random_disk(5, 1, {NeighborhoodKind::GridRow, 0}, 9);
  std::vector<double> base(5), sf(5, -1.0);
  kernels::base_priorities_serial(d.blocks(), d.hyperparams(), base);
  kernels::spatial_factors_serial(d.geometry(), d.blocks(), base, sf);
  for (double v : sf) CHECK(v == 0.0);
}
