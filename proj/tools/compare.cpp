#include "compare.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <sstream>

#include "apex/recovery.hpp"
#include "apex/workload.hpp"

namespace apex::cli {

void CompareConfig::validate() const {
  if (primary_files == 0) throw InvalidArgument("compare.primary_files must be positive");
  if (!(primary_fraction > 0.0 && primary_fraction <= 1.0)) {
    throw InvalidArgument("compare.primary_fraction must lie in (0,1]");
  }
  if (secondary_fractions.empty()) throw InvalidArgument("compare.secondary_fractions is empty");
  for (double f : secondary_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw InvalidArgument("secondary fractions must lie in [0,1]");
  }
  if (seeds.empty()) throw InvalidArgument("compare.seeds is empty");
  if (policies.empty()) throw InvalidArgument("compare.policies is empty");
  if (secondary_max_blocks == 0) throw InvalidArgument("compare.secondary_max_blocks must be positive");
}

namespace {

struct Driver {
  FileSystem& fs;
  Tick tick = 0;

  void run(WorkloadOp op) {
    op.tick = ++tick;
    apply_op(fs, op);
  }
};

}  // namespace

CompareRow run_compare_cell(const DiskGeometry& geometry, LinkingMode linking,
                            const Hyperparams& hp, const CompareConfig& config,
                            const CompareCell& cell) {
  config.validate();
  AllocationPolicy policy{cell.policy, cell.policy == AllocationPolicy::Kind::Random ? cell.seed : 0};
  FileSystem fs(geometry, hp, {linking, policy});
  Driver drive{fs};
  const std::uint64_t total = fs.disk().block_count();
  const std::uint64_t bs = geometry.block_size_bytes;

  const std::uint64_t per_file = static_cast<std::uint64_t>(
      std::floor(static_cast<double>(total) * config.primary_fraction / config.primary_files));
  if (per_file < 2) throw InvalidArgument("disk too small for the primary file set");

  std::vector<std::string> primaries;
  std::vector<FileId> ids;
  for (std::uint32_t i = 0; i < config.primary_files; ++i) {
    primaries.push_back("/video" + std::to_string(i + 1) + ".mp4");
    WorkloadOp op;
    op.kind = WorkloadOp::Kind::Create;
    op.path = primaries.back();
    op.size_blocks = static_cast<std::uint32_t>(per_file - 1);
    op.type_class = TypeClass::Partial;
    drive.run(op);
    ids.push_back(fs.find_file(op.path)->id);
  }

  // Access pattern: one read each so every file carries weight, then a
  // seeded mix of reads and one-block writes.
  std::mt19937_64 access_rng(cell.seed);
  for (const auto& p : primaries) drive.run({WorkloadOp::Kind::Read, 0, p});
  std::uniform_int_distribution<std::size_t> pick(0, primaries.size() - 1);
  std::bernoulli_distribution is_write(0.5);
  std::uniform_int_distribution<std::uint64_t> block(0, per_file - 2);
  for (std::uint32_t i = 0; i < config.access_ops; ++i) {
    WorkloadOp op;
    op.path = primaries[pick(access_rng)];
    if (is_write(access_rng)) {
      op.kind = WorkloadOp::Kind::Write;
      op.offset = block(access_rng) * bs;
      op.length = bs;
    } else {
      op.kind = WorkloadOp::Kind::Read;
    }
    drive.run(op);
  }
  for (const auto& p : primaries) drive.run({WorkloadOp::Kind::Delete, 0, p});

  // Secondary sizes come from their own stream so that a smaller target
  // writes a prefix of a larger one.
  std::mt19937_64 size_rng(cell.seed ^ 0x5ec0dda7a5eedULL);
  std::uniform_int_distribution<std::uint32_t> size(1, config.secondary_max_blocks);
  const auto target = static_cast<std::uint64_t>(
      std::llround(static_cast<double>(total) * cell.secondary_fraction));
  CompareRow row;
  row.cell = cell;
  std::uint32_t n = 0;
  while (row.secondary_blocks < target) {
    const std::uint64_t remaining = target - row.secondary_blocks;
    const std::uint64_t blocks = std::min<std::uint64_t>(size(size_rng) + 1, remaining);
    WorkloadOp op;
    op.kind = WorkloadOp::Kind::Create;
    op.path = "/s" + std::to_string(++n) + ".dat";
    op.size_blocks = static_cast<std::uint32_t>(blocks - 1);
    op.type_class = TypeClass::Partial;
    drive.run(op);
    row.secondary_blocks += blocks;
  }

  std::vector<const FileRecord*> deleted;
  for (auto id : ids) deleted.push_back(&fs.file(id));
  for (const auto* f : deleted) row.rr.push_back(recover_file(fs.disk(), *f).rr);
  row.weighted_rr = weighted_rr(fs.disk(), deleted);
  double sum = 0.0;
  for (double r : row.rr) sum += r;
  row.mean_rr = row.rr.empty() ? 0.0 : sum / static_cast<double>(row.rr.size());
  return row;
}

std::vector<CompareRow> run_compare(const DiskGeometry& geometry, LinkingMode linking,
                                    const Hyperparams& hp, const CompareConfig& config) {
  config.validate();
  std::vector<double> fractions = config.secondary_fractions;
  std::sort(fractions.begin(), fractions.end());
  std::vector<CompareCell> cells;
  for (auto policy : config.policies) {
    for (double f : fractions) {
      for (auto seed : config.seeds) cells.push_back({policy, f, seed});
    }
  }
  std::vector<CompareRow> rows(cells.size());
  std::vector<std::exception_ptr> errors(cells.size());
  const auto n = static_cast<std::ptrdiff_t>(cells.size());
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    try {
      rows[i] = run_compare_cell(geometry, linking, hp, config, cells[i]);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return rows;
}

std::string compare_csv(const std::vector<CompareRow>& rows, std::uint32_t primary_files) {
  std::ostringstream out;
  out.precision(17);
  out << "policy,secondary_fraction,secondary_blocks,seed,weighted_rr,mean_rr";
  for (std::uint32_t i = 1; i <= primary_files; ++i) out << ",rr_" << i;
  out << '\n';
  for (const auto& r : rows) {
    out << to_string(AllocationPolicy{r.cell.policy, 0}) << ',' << r.cell.secondary_fraction << ','
        << r.secondary_blocks << ',' << r.cell.seed << ',' << r.weighted_rr << ',' << r.mean_rr;
    for (double v : r.rr) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

}  // namespace apex::cli
