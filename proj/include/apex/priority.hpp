#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include "apex/disk.hpp"
#include "apex/file_record.hpp"

namespace apex {

// PF = lambda*HF - sigma*UF + rho*SF + mu*LF. The rho term is omitted when
// the medium has no spatial neighborhood.
double priority_factor(const BlockFactors& factors, const Hyperparams& hp, bool spatial_enabled);

// PF without the spatial term. This is what neighbors contribute to SF, so
// the spatial pass has no feedback through rho.
double base_priority(const BlockFactors& factors, const Hyperparams& hp);

struct OverwriteOfSibling {
  BlockAddress overwritten = 0;
  MrpfRecord lineage;
};
struct FileAccess {
  FileId file = 0;
};
struct SpatialPass {};

using FactorEvent = std::variant<OverwriteOfSibling, FileAccess, SpatialPass>;

// Bumps UF on every block of a live file and stamps its last access.
void record_file_access(Disk& disk, FileRecord& file);

// Raises HF of the still-unused siblings that carry the same lineage as
// the overwritten block. No-op when the block has no lineage.
void record_overwrite_event(Disk& disk, BlockAddress overwritten);
void record_overwrite_event(Disk& disk, BlockAddress overwritten, const MrpfRecord& lineage);

// One Jacobi pass: unused blocks get the mean base PF of their neighbors,
// used blocks get 0, then all unused keys are refreshed.
void update_spatial_factors(Disk& disk);

// Highest-PF unused addresses, descending, address-ascending on ties.
std::vector<BlockAddress> top_unused(const Disk& disk, std::size_t count);

}  // namespace apex
