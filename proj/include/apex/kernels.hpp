#pragma once

// Per-block data-parallel kernels. Each has a serial reference used by the
// tests and an OpenMP version used by the engine; both produce bit-identical
// output because every output element is computed by the same expression in
// the same order.

#include <cstddef>
#include <span>

#include "apex/disk.hpp"

namespace apex::kernels {

// Below this block count the OpenMP versions run on the calling thread.
inline constexpr std::size_t kParallelThreshold = 4096;

void base_priorities_serial(std::span<const Block> blocks, const Hyperparams& hp,
                            std::span<double> out);
void base_priorities_parallel(std::span<const Block> blocks, const Hyperparams& hp,
                              std::span<double> out);

// New SF for every block given the base PF of every block.
void spatial_factors_serial(const DiskGeometry& geometry, std::span<const Block> blocks,
                            std::span<const double> base, std::span<double> out);
void spatial_factors_parallel(const DiskGeometry& geometry, std::span<const Block> blocks,
                              std::span<const double> base, std::span<double> out);

// Full PF of every block (used blocks included).
void priority_keys_serial(std::span<const Block> blocks, const Hyperparams& hp, bool spatial,
                          std::span<double> out);
void priority_keys_parallel(std::span<const Block> blocks, const Hyperparams& hp, bool spatial,
                            std::span<double> out);

}  // namespace apex::kernels
