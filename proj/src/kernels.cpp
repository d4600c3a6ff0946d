#include "apex/kernels.hpp"

#include <algorithm>
#include <cstdint>

#include "apex/priority.hpp"

namespace apex::kernels {

namespace {

using Index = std::int64_t;

bool is_used(const Block& b) { return b.state == BlockState::Used; }

double row_sum(std::span<const double> base, std::size_t row, std::size_t cols) {
  double sum = 0.0;
  for (std::size_t c = 0; c < cols; ++c) sum += base[row * cols + c];
  return sum;
}

double grid_row_factor(std::span<const double> base, std::size_t address, std::size_t cols,
                       double sum_of_row) {
  if (cols < 2) return 0.0;
  return (sum_of_row - base[address]) / static_cast<double>(cols - 1);
}

double contiguous_factor(std::span<const double> base, std::size_t address, std::size_t k) {
  const std::size_t n = base.size();
  const std::size_t lo = address >= k ? address - k : 0;
  const std::size_t hi = std::min(n - 1, address + k);
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t j = lo; j <= hi; ++j) {
    if (j == address) continue;
    sum += base[j];
    ++count;
  }
  return count == 0 ? 0.0 : sum / static_cast<double>(count);
}

}  // namespace

void base_priorities_serial(std::span<const Block> blocks, const Hyperparams& hp,
                            std::span<double> out) {
  for (std::size_t i = 0; i < blocks.size(); ++i) out[i] = base_priority(blocks[i].factors, hp);
}

void base_priorities_parallel(std::span<const Block> blocks, const Hyperparams& hp,
                              std::span<double> out) {
  const Index n = static_cast<Index>(blocks.size());
#pragma omp parallel for schedule(static) if (blocks.size() >= kParallelThreshold)
  for (Index i = 0; i < n; ++i) out[i] = base_priority(blocks[i].factors, hp);
}

void spatial_factors_serial(const DiskGeometry& geometry, std::span<const Block> blocks,
                            std::span<const double> base, std::span<double> out) {
  const std::size_t n = blocks.size();
  switch (geometry.neighborhood.kind) {
    case NeighborhoodKind::None:
      for (std::size_t i = 0; i < n; ++i) out[i] = 0.0;
      return;
    case NeighborhoodKind::GridRow: {
      const std::size_t cols = geometry.cols;
      for (std::size_t r = 0; r < geometry.rows; ++r) {
        const double sum = row_sum(base, r, cols);
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t i = r * cols + c;
          out[i] = is_used(blocks[i]) ? 0.0 : grid_row_factor(base, i, cols, sum);
        }
      }
      return;
    }
    case NeighborhoodKind::Contiguous:
      for (std::size_t i = 0; i < n; ++i) {
        out[i] = is_used(blocks[i]) ? 0.0 : contiguous_factor(base, i, geometry.neighborhood.k);
      }
      return;
  }
}

void spatial_factors_parallel(const DiskGeometry& geometry, std::span<const Block> blocks,
                              std::span<const double> base, std::span<double> out) {
  const bool go_parallel = blocks.size() >= kParallelThreshold;
  switch (geometry.neighborhood.kind) {
    case NeighborhoodKind::None: {
      const Index n = static_cast<Index>(blocks.size());
#pragma omp parallel for schedule(static) if (go_parallel)
      for (Index i = 0; i < n; ++i) out[i] = 0.0;
      return;
    }
    case NeighborhoodKind::GridRow: {
      const std::size_t cols = geometry.cols;
      const Index rows = static_cast<Index>(geometry.rows);
#pragma omp parallel for schedule(static) if (go_parallel)
      for (Index r = 0; r < rows; ++r) {
        const auto row = static_cast<std::size_t>(r);
        const double sum = row_sum(base, row, cols);
        for (std::size_t c = 0; c < cols; ++c) {
          const std::size_t i = row * cols + c;
          out[i] = is_used(blocks[i]) ? 0.0 : grid_row_factor(base, i, cols, sum);
        }
      }
      return;
    }
    case NeighborhoodKind::Contiguous: {
      const Index n = static_cast<Index>(blocks.size());
      const std::size_t k = geometry.neighborhood.k;
#pragma omp parallel for schedule(static) if (go_parallel)
      for (Index i = 0; i < n; ++i) {
        const auto a = static_cast<std::size_t>(i);
        out[a] = is_used(blocks[a]) ? 0.0 : contiguous_factor(base, a, k);
      }
      return;
    }
  }
}

void priority_keys_serial(std::span<const Block> blocks, const Hyperparams& hp, bool spatial,
                          std::span<double> out) {
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    out[i] = priority_factor(blocks[i].factors, hp, spatial);
  }
}

void priority_keys_parallel(std::span<const Block> blocks, const Hyperparams& hp, bool spatial,
                            std::span<double> out) {
  const Index n = static_cast<Index>(blocks.size());
#pragma omp parallel for schedule(static) if (blocks.size() >= kParallelThreshold)
  for (Index i = 0; i < n; ++i) out[i] = priority_factor(blocks[i].factors, hp, spatial);
}

}  // namespace apex::kernels
