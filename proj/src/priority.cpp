#include "apex/priority.hpp"

#include <string>

#include "apex/kernels.hpp"

namespace apex {

double base_priority(const BlockFactors& f, const Hyperparams& hp) {
  return static_cast<double>(hp.lambda) * static_cast<double>(f.hf) -
         static_cast<double>(hp.sigma) * static_cast<double>(f.uf) +
         static_cast<double>(hp.mu) * static_cast<double>(f.lf);
}

double priority_factor(const BlockFactors& f, const Hyperparams& hp, bool spatial_enabled) {
  double pf = static_cast<double>(hp.lambda) * static_cast<double>(f.hf) -
              static_cast<double>(hp.sigma) * static_cast<double>(f.uf);
  if (spatial_enabled) pf += static_cast<double>(hp.rho) * f.sf;
  return pf + static_cast<double>(hp.mu) * static_cast<double>(f.lf);
}

void record_file_access(Disk& disk, FileRecord& file) {
  if (file.status != FileStatus::Used) {
    throw InvalidArgument("cannot access " + std::string(to_string(file.status)) + " file " +
                          file.path);
  }
  for (auto address : file.block_list) {
    auto factors = disk.block(address).factors;
    ++factors.uf;
    disk.set_factors(address, factors);
  }
  ++file.uf_counter;
  file.last_access_tick = disk.clock();
}

void record_overwrite_event(Disk& disk, BlockAddress overwritten) {
  const auto& mrpf = disk.block(overwritten).mrpf;
  if (!mrpf) return;
  const MrpfRecord lineage = *mrpf;
  record_overwrite_event(disk, overwritten, lineage);
}

void record_overwrite_event(Disk& disk, BlockAddress overwritten, const MrpfRecord& lineage) {
  for (auto sibling : lineage.siblings()) {
    if (sibling == overwritten) continue;
    const Block& b = disk.block(sibling);
    if (b.state != BlockState::Unused || !b.mrpf || !b.mrpf->same_lineage(lineage)) continue;
    auto factors = b.factors;
    ++factors.hf;
    disk.set_factors(sibling, factors);
  }
}

void update_spatial_factors(Disk& disk) {
  if (!disk.spatial_enabled()) return;
  const auto blocks = disk.blocks();
  std::vector<double> base(blocks.size());
  std::vector<double> sf(blocks.size());
  kernels::base_priorities_parallel(blocks, disk.hyperparams(), base);
  kernels::spatial_factors_parallel(disk.geometry(), blocks, base, sf);
  disk.set_spatial_factors(sf);
}

std::vector<BlockAddress> top_unused(const Disk& disk, std::size_t count) {
  if (count > disk.unused().size()) {
    throw DiskFull("need " + std::to_string(count) + " free blocks, have " +
                   std::to_string(disk.unused().size()));
  }
  return disk.unused().top(count);
}

}  // namespace apex
