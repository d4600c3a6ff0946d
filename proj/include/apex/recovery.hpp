#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "apex/disk.hpp"
#include "apex/file_record.hpp"
#include "apex/vfs.hpp"

namespace apex {

struct RecoveryResult {
  FileId file_id = 0;
  std::vector<BlockAddress> surviving_blocks;
  std::size_t total_blocks = 0;
  bool metadata_intact = false;
  std::uint64_t recovered_bytes = 0;
  double rr = 0.0;
};

enum class AatMode { TimestampLiteral, SeekCost };

std::string_view to_string(AatMode mode);
AatMode parse_aat_mode(std::string_view text);

struct PerfWeights {
  double alpha = 1.0;
  double beta = 0.0;
  AatMode aat_mode = AatMode::SeekCost;

  void validate() const;
};

// A block survives iff it is unused, still names this file as parent with
// the same epoch, and holds the payload version the file left behind.
RecoveryResult recover_file(const Disk& disk, const FileRecord& file);

// 100 * sum(rr * uf) / sum(uf); 0 when `files` is empty or all uf are 0.
double weighted_rr(const Disk& disk, std::span<const FileRecord* const> files);

// Which deleted files the objective averages over.
enum class DeletedScope {
  All,        // Deleted and Obsolete
  Fragments,  // Deleted only: files with some lineage left on disk
};

std::string_view to_string(DeletedScope scope);
DeletedScope parse_deleted_scope(std::string_view text);

std::vector<const FileRecord*> deleted_files(const FileSystem& fs,
                                             DeletedScope scope = DeletedScope::All);

double weighted_rr(const FileSystem& fs, DeletedScope scope = DeletedScope::All);

// Per-file layout cost: sum of |gap| between consecutive blocks, normalized
// by (blocks - 1) * disk size. Zero for single-block files.
double seek_cost(const FileRecord& file, std::size_t total_blocks);

// Mean over current files; 0 when there are none.
double access_time_term(const FileSystem& fs, AatMode mode);

struct PerfBreakdown {
  double weighted_rr = 0.0;
  double access_time = 0.0;
  double p = 0.0;
};

// P = alpha * weighted_rr - beta * access_time_term.
double performance(const FileSystem& fs, const PerfWeights& weights);
PerfBreakdown performance_breakdown(const FileSystem& fs, const PerfWeights& weights,
                                    DeletedScope scope = DeletedScope::All);

struct RecoveryRow {
  FileId file_id = 0;
  std::string path;
  TypeClass type_class = TypeClass::Partial;
  FileStatus status = FileStatus::Deleted;
  std::uint64_t uf = 0;
  std::size_t surviving_blocks = 0;
  std::size_t total_blocks = 0;
  bool metadata_intact = false;
  double rr = 0.0;
};

std::vector<RecoveryRow> recovery_table(const FileSystem& fs);
nlohmann::json recovery_table_json(std::span<const RecoveryRow> rows);
// Header: file_id,path,type,status,uf,surviving_blocks,total_blocks,metadata_intact,rr
std::string recovery_table_csv(std::span<const RecoveryRow> rows);

}  // namespace apex
