#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "apex/disk.hpp"
#include "apex/events.hpp"
#include "apex/file_record.hpp"

namespace apex {

// Which lineage gets LF = 1 once a block has a parent file. Fresh blocks are
// always 1. Literal: linked lineage 1, partial lineage 0.
enum class LinkingMode { Literal, Inverted };

struct AllocationPolicy {
  enum class Kind { Apex, FirstFit, Random };
  Kind kind = Kind::Apex;
  std::uint64_t seed = 0;  // Random only

  static AllocationPolicy apex() { return {Kind::Apex, 0}; }
  static AllocationPolicy first_fit() { return {Kind::FirstFit, 0}; }
  static AllocationPolicy random(std::uint64_t seed) { return {Kind::Random, seed}; }
};

std::string to_string(const AllocationPolicy& policy);
std::string_view to_string(LinkingMode mode);
LinkingMode parse_linking_mode(std::string_view text);

struct FsOptions {
  LinkingMode linking = LinkingMode::Literal;
  AllocationPolicy policy;
};

struct PathNode {
  enum class Kind { Directory, File };
  std::string name;
  Kind kind = Kind::Directory;
  std::vector<PathNode> children;  // sorted by name; directories only
  FileId file = 0;                 // files only
};

class FileSystem {
 public:
  FileSystem(DiskGeometry geometry, Hyperparams hyperparams, FsOptions options = {});

  const Disk& disk() const { return disk_; }
  Disk& disk() { return disk_; }
  const FsOptions& options() const { return options_; }
  const PathNode& root() const { return root_; }

  void set_event_sink(EventSink* sink) { sink_ = sink; }

  void make_directory(std::string_view path);

  // Allocates ceil(size/block) data blocks plus one metadata block.
  // The type class defaults to the one implied by the extension.
  const FileRecord& create_file(std::string_view path, std::uint64_t size_bytes,
                                std::optional<TypeClass> type_class = std::nullopt);
  void delete_file(std::string_view path);
  std::vector<std::byte> read_file(std::string_view path);
  void write_file(std::string_view path, std::uint64_t offset, std::span<const std::byte> bytes);

  // Deleted files with no surviving lineage become Obsolete.
  std::size_t mark_obsolete_sweep();

  // Spatial pass over the disk, logged as an event.
  void update_spatial_factors();

  const FileRecord* find_file(std::string_view path) const;
  const FileRecord& file(FileId id) const;
  std::span<const FileRecord> files() const { return files_; }
  // Ids of files with status Used, in a deterministic order.
  std::span<const FileId> live_files() const { return live_; }
  // Ids of files with status Deleted (some lineage still on disk), in
  // deletion order.
  std::span<const FileId> deleted_with_fragments() const { return pending_deleted_; }

  nlohmann::json to_json() const;
  static FileSystem from_json(const nlohmann::json& doc);

  // Disk invariants plus block ownership against the file table.
  void check_invariants() const;

 private:
  int linking_factor(TypeClass t) const;
  std::vector<BlockAddress> choose_blocks(std::size_t count);
  FileRecord& live_file(std::string_view path);
  PathNode* lookup(std::string_view path);
  const PathNode* lookup(std::string_view path) const;
  PathNode& parent_directory(std::string_view path, std::string& leaf);
  void emit(const DiskEvent& event);

  Disk disk_;
  FsOptions options_;
  PathNode root_;
  std::vector<FileRecord> files_;
  std::vector<FileId> live_;
  std::vector<FileId> pending_deleted_;
  std::uint64_t next_epoch_ = 1;
  std::mt19937_64 policy_rng_;
  EventSink* sink_ = nullptr;
};

}  // namespace apex
