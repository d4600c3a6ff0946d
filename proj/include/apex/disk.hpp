#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "apex/types.hpp"

namespace apex {

enum class NeighborhoodKind {
  GridRow,     // every other block in the same row (sector)
  Contiguous,  // addresses within +/- k
  None,        // random-access media: spatial term dropped
};

struct Neighborhood {
  NeighborhoodKind kind = NeighborhoodKind::GridRow;
  std::uint32_t k = 1;  // only meaningful for Contiguous

  static Neighborhood grid_row() { return {NeighborhoodKind::GridRow, 1}; }
  static Neighborhood contiguous(std::uint32_t k) { return {NeighborhoodKind::Contiguous, k}; }
  static Neighborhood none() { return {NeighborhoodKind::None, 1}; }

  friend bool operator==(const Neighborhood&, const Neighborhood&) = default;
};

struct DiskGeometry {
  std::uint32_t rows = 16;
  std::uint32_t cols = 16;
  std::uint32_t block_size_bytes = 4096;
  Neighborhood neighborhood;

  std::size_t block_count() const { return std::size_t{rows} * cols; }
  bool spatial_enabled() const { return neighborhood.kind != NeighborhoodKind::None; }
  // Throws InvalidArgument on a zero-sized or otherwise unusable geometry.
  void validate() const;

  friend bool operator==(const DiskGeometry&, const DiskGeometry&) = default;
};

struct BlockFactors {
  std::uint64_t hf = 0;
  std::uint64_t uf = 0;
  double sf = 0.0;
  int lf = 1;

  friend bool operator==(const BlockFactors&, const BlockFactors&) = default;
};

// Most recent parent file of a block and the block set it was allocated with.
struct MrpfRecord {
  FileId file_id = 0;
  std::shared_ptr<const std::vector<BlockAddress>> sibling_blocks;  // sorted
  std::uint64_t content_epoch = 0;

  std::span<const BlockAddress> siblings() const {
    return sibling_blocks ? std::span<const BlockAddress>(*sibling_blocks)
                          : std::span<const BlockAddress>();
  }
  bool same_lineage(const MrpfRecord& other) const {
    return file_id == other.file_id && content_epoch == other.content_epoch;
  }
};

enum class BlockState : std::uint8_t { Unused, Used };
enum class Direction { ToUsed, ToUnused };

// Block content. An empty byte vector stands for an all-zero block.
struct Payload {
  std::uint64_t version = 0;
  std::vector<std::byte> bytes;
};

struct Block {
  BlockAddress index = 0;
  BlockState state = BlockState::Unused;
  BlockFactors factors;
  std::optional<MrpfRecord> mrpf;
  Payload payload;
};

// Unused blocks ordered by descending key, then ascending address.
class PriorityIndex {
 public:
  struct Entry {
    double key;
    BlockAddress address;
  };
  struct Order {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.key != b.key) return a.key > b.key;
      return a.address < b.address;
    }
  };
  using Container = std::set<Entry, Order>;

  explicit PriorityIndex(std::size_t capacity = 0);

  void insert(BlockAddress address, double key);
  void erase(BlockAddress address);
  void update(BlockAddress address, double key);
  bool contains(BlockAddress address) const { return present_[address] != 0; }
  double key(BlockAddress address) const { return keys_[address]; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // Replaces every stored key in one shot; `keys` is indexed by address.
  void rebuild(std::span<const double> keys);

  std::vector<BlockAddress> top(std::size_t count) const;
  Container::const_iterator begin() const { return entries_.begin(); }
  Container::const_iterator end() const { return entries_.end(); }

 private:
  Container entries_;
  std::vector<double> keys_;
  std::vector<std::uint8_t> present_;
};

class Disk {
 public:
  Disk(DiskGeometry geometry, Hyperparams hyperparams);

  const DiskGeometry& geometry() const { return geometry_; }
  const Hyperparams& hyperparams() const { return hyperparams_; }
  std::size_t block_count() const { return blocks_.size(); }
  bool spatial_enabled() const { return geometry_.spatial_enabled(); }

  const Block& block(BlockAddress address) const;
  std::span<const Block> blocks() const { return blocks_; }
  const PriorityIndex& unused() const { return unused_; }
  const std::unordered_set<BlockAddress>& used() const { return used_; }
  double utilization() const;

  Tick clock() const { return clock_; }
  Tick advance_clock() { return ++clock_; }
  // Jumps the clock forward; `tick` must be strictly greater than clock().
  void advance_clock_to(Tick tick);

  // PF recomputed from the block's current factors.
  double priority(BlockAddress address) const;

  void set_hyperparams(const Hyperparams& hp);

  // Moves a block between the used and unused collections, applying the
  // HF/UF/SF transition rules. Returns the factors after the transition.
  BlockFactors transition(BlockAddress address, Direction direction);

  // Overwrites factors and refreshes the block's key if it is unused.
  void set_factors(BlockAddress address, const BlockFactors& factors);

  // Sets sf for every block and refreshes all unused keys.
  void set_spatial_factors(std::span<const double> sf);

  void set_mrpf(BlockAddress address, std::optional<MrpfRecord> mrpf);

  // Fresh content for a newly allocated block: zeroed bytes, version bump.
  void reset_payload(BlockAddress address);
  void write_payload(BlockAddress address, std::size_t offset, std::span<const std::byte> bytes);

  nlohmann::json to_json() const;
  static Disk from_json(const nlohmann::json& doc);

  // Exhaustive structural check used by tests and debug builds.
  void check_invariants() const;

 private:
  Block& mutable_block(BlockAddress address);
  void refresh_all_keys();

  DiskGeometry geometry_;
  Hyperparams hyperparams_;
  std::vector<Block> blocks_;
  PriorityIndex unused_;
  std::unordered_set<BlockAddress> used_;
  Tick clock_ = 0;
};

inline constexpr int kDiskSnapshotVersion = 1;

// Accepts "grid-row", "none", "contiguous:K".
Neighborhood parse_neighborhood(std::string_view text);
std::string to_string(const Neighborhood& n);

}  // namespace apex
