#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "apex/vfs.hpp"

namespace apex::cli {

// Case-study recipe: equal Partial primaries are written, accessed, deleted,
// then secondary data is written up to a fraction of the disk and the
// primaries are recovered.
struct CompareConfig {
  std::uint32_t primary_files = 5;
  double primary_fraction = 0.5;  // of all blocks, metadata included
  std::vector<double> secondary_fractions{0.0, 0.4, 0.78, 1.0};
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::vector<AllocationPolicy::Kind> policies{AllocationPolicy::Kind::Apex,
                                               AllocationPolicy::Kind::FirstFit,
                                               AllocationPolicy::Kind::Random};
  std::uint32_t access_ops = 200;          // reads and writes spread over the primaries
  std::uint32_t secondary_max_blocks = 20;  // data blocks per secondary file

  void validate() const;
};

struct CompareCell {
  AllocationPolicy::Kind policy = AllocationPolicy::Kind::Apex;
  double secondary_fraction = 0.0;
  std::uint64_t seed = 0;
};

struct CompareRow {
  CompareCell cell;
  std::uint64_t secondary_blocks = 0;  // blocks actually written, metadata included
  double weighted_rr = 0.0;            // percent
  double mean_rr = 0.0;
  std::vector<double> rr;  // per primary, creation order
};

CompareRow run_compare_cell(const DiskGeometry& geometry, LinkingMode linking,
                            const Hyperparams& hp, const CompareConfig& config,
                            const CompareCell& cell);

// All (policy, fraction, seed) cells, run in parallel. Rows come back sorted
// by policy order, fraction, then seed.
std::vector<CompareRow> run_compare(const DiskGeometry& geometry, LinkingMode linking,
                                    const Hyperparams& hp, const CompareConfig& config);

// Header: policy,secondary_fraction,secondary_blocks,seed,weighted_rr,mean_rr,rr_1..rr_n
std::string compare_csv(const std::vector<CompareRow>& rows, std::uint32_t primary_files);

}  // namespace apex::cli
