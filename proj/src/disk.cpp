#include "apex/disk.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <iterator>
#include <limits>

#include <boost/algorithm/hex.hpp>

#include "apex/kernels.hpp"
#include "apex/priority.hpp"

namespace apex {

void DiskGeometry::validate() const {
  if (rows == 0 || cols == 0) throw InvalidArgument("disk geometry must have at least one block");
  if (block_size_bytes == 0) throw InvalidArgument("block size must be positive");
  if (block_count() > std::numeric_limits<BlockAddress>::max()) {
    throw InvalidArgument("disk geometry exceeds the addressable block range");
  }
  if (neighborhood.kind == NeighborhoodKind::Contiguous && neighborhood.k == 0) {
    throw InvalidArgument("contiguous neighborhood needs k >= 1");
  }
}

std::string to_string(const Neighborhood& n) {
  switch (n.kind) {
    case NeighborhoodKind::GridRow:
      return "grid-row";
    case NeighborhoodKind::Contiguous:
      return "contiguous:" + std::to_string(n.k);
    case NeighborhoodKind::None:
      return "none";
  }
  return "?";
}

Neighborhood parse_neighborhood(std::string_view text) {
  if (text == "grid-row") return Neighborhood::grid_row();
  if (text == "none") return Neighborhood::none();
  constexpr std::string_view kPrefix = "contiguous:";
  if (text.starts_with(kPrefix)) {
    auto digits = text.substr(kPrefix.size());
    std::uint32_t k = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), k);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && k > 0) {
      return Neighborhood::contiguous(k);
    }
  }
  throw InvalidArgument("bad neighborhood '" + std::string(text) +
                        "' (expected grid-row, none or contiguous:K)");
}

// ---------------------------------------------------------------------------
// PriorityIndex

PriorityIndex::PriorityIndex(std::size_t capacity)
    : keys_(capacity, std::numeric_limits<double>::quiet_NaN()), present_(capacity, 0) {}

void PriorityIndex::insert(BlockAddress address, double key) {
  if (present_[address]) throw InvariantViolation("block already in unused index");
  entries_.insert({key, address});
  keys_[address] = key;
  present_[address] = 1;
}

void PriorityIndex::erase(BlockAddress address) {
  if (!present_[address]) throw InvariantViolation("block not in unused index");
  entries_.erase({keys_[address], address});
  keys_[address] = std::numeric_limits<double>::quiet_NaN();
  present_[address] = 0;
}

void PriorityIndex::update(BlockAddress address, double key) {
  if (!present_[address]) throw InvariantViolation("block not in unused index");
  if (keys_[address] == key) return;
  auto node = entries_.extract({keys_[address], address});
  node.value().key = key;
  entries_.insert(std::move(node));
  keys_[address] = key;
}

void PriorityIndex::rebuild(std::span<const double> keys) {
  std::vector<Entry> sorted;
  sorted.reserve(entries_.size());
  for (std::size_t a = 0; a < present_.size(); ++a) {
    if (!present_[a]) continue;
    keys_[a] = keys[a];
    sorted.push_back({keys[a], static_cast<BlockAddress>(a)});
  }
  std::sort(sorted.begin(), sorted.end(), Order{});
  entries_.clear();
  for (const auto& e : sorted) entries_.insert(entries_.end(), e);
}

std::vector<BlockAddress> PriorityIndex::top(std::size_t count) const {
  std::vector<BlockAddress> out;
  out.reserve(std::min(count, entries_.size()));
  for (auto it = entries_.begin(); it != entries_.end() && out.size() < count; ++it) {
    out.push_back(it->address);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Disk

Disk::Disk(DiskGeometry geometry, Hyperparams hyperparams)
    : geometry_(geometry), hyperparams_(hyperparams) {
  geometry_.validate();
  const auto n = geometry_.block_count();
  blocks_.resize(n);
  unused_ = PriorityIndex(n);
  for (std::size_t a = 0; a < n; ++a) {
    blocks_[a].index = static_cast<BlockAddress>(a);
    unused_.insert(blocks_[a].index, priority(blocks_[a].index));
  }
}

const Block& Disk::block(BlockAddress address) const {
  if (address >= blocks_.size()) throw InvalidArgument("block address out of range");
  return blocks_[address];
}

Block& Disk::mutable_block(BlockAddress address) {
  if (address >= blocks_.size()) throw InvalidArgument("block address out of range");
  return blocks_[address];
}

void Disk::advance_clock_to(Tick tick) {
  if (tick <= clock_) {
    throw InvalidArgument("tick " + std::to_string(tick) + " is not after clock " +
                          std::to_string(clock_));
  }
  clock_ = tick;
}

double Disk::utilization() const {
  return static_cast<double>(used_.size()) / static_cast<double>(blocks_.size());
}

double Disk::priority(BlockAddress address) const {
  return priority_factor(block(address).factors, hyperparams_, spatial_enabled());
}

void Disk::set_hyperparams(const Hyperparams& hp) {
  hyperparams_ = hp;
  refresh_all_keys();
}

BlockFactors Disk::transition(BlockAddress address, Direction direction) {
  Block& b = mutable_block(address);
  if (direction == Direction::ToUsed) {
    if (b.state == BlockState::Used) throw InvalidArgument("block is already used");
    b.factors.hf = 1;
    b.factors.uf = 1;
    b.factors.sf = 0.0;
    b.state = BlockState::Used;
    unused_.erase(address);
    used_.insert(address);
  } else {
    if (b.state == BlockState::Unused) throw InvalidArgument("block is already unused");
    b.factors.hf = 0;
    b.state = BlockState::Unused;
    used_.erase(address);
    unused_.insert(address, priority(address));
  }
  return b.factors;
}

void Disk::set_factors(BlockAddress address, const BlockFactors& factors) {
  Block& b = mutable_block(address);
  b.factors = factors;
  if (b.state == BlockState::Unused) unused_.update(address, priority(address));
}

void Disk::set_spatial_factors(std::span<const double> sf) {
  if (sf.size() != blocks_.size()) throw InvalidArgument("spatial factor vector has wrong length");
  for (std::size_t a = 0; a < blocks_.size(); ++a) blocks_[a].factors.sf = sf[a];
  refresh_all_keys();
}

void Disk::refresh_all_keys() {
  std::vector<double> keys(blocks_.size());
  kernels::priority_keys_parallel(blocks_, hyperparams_, spatial_enabled(), keys);
  unused_.rebuild(keys);
}

void Disk::set_mrpf(BlockAddress address, std::optional<MrpfRecord> mrpf) {
  mutable_block(address).mrpf = std::move(mrpf);
}

void Disk::reset_payload(BlockAddress address) {
  Block& b = mutable_block(address);
  b.payload.bytes.clear();
  b.payload.bytes.shrink_to_fit();
  ++b.payload.version;
}

void Disk::write_payload(BlockAddress address, std::size_t offset,
                         std::span<const std::byte> bytes) {
  Block& b = mutable_block(address);
  if (offset + bytes.size() > geometry_.block_size_bytes) {
    throw InvalidArgument("write crosses the block boundary");
  }
  if (b.payload.bytes.empty()) b.payload.bytes.assign(geometry_.block_size_bytes, std::byte{0});
  std::copy(bytes.begin(), bytes.end(), b.payload.bytes.begin() + static_cast<std::ptrdiff_t>(offset));
  ++b.payload.version;
}

void Disk::check_invariants() const {
  std::size_t n_used = 0;
  std::size_t n_unused = 0;
  for (const auto& b : blocks_) {
    const bool in_used = used_.contains(b.index);
    const bool in_unused = unused_.contains(b.index);
    if (in_used == in_unused) throw InvariantViolation("block not in exactly one collection");
    if (b.state == BlockState::Used) {
      ++n_used;
      if (!in_used) throw InvariantViolation("used block missing from used set");
      if (b.factors.sf != 0.0) throw InvariantViolation("used block with non-zero sf");
      if (!b.mrpf) throw InvariantViolation("used block without parent file");
    } else {
      ++n_unused;
      if (!in_unused) throw InvariantViolation("unused block missing from unused index");
      if (unused_.key(b.index) != priority(b.index)) {
        throw InvariantViolation("stale priority key for block " + std::to_string(b.index));
      }
    }
    if (b.factors.lf != 0 && b.factors.lf != 1) throw InvariantViolation("lf outside {0,1}");
    if (b.mrpf) {
      auto sib = b.mrpf->siblings();
      if (!std::binary_search(sib.begin(), sib.end(), b.index)) {
        throw InvariantViolation("mrpf sibling set does not contain the block");
      }
    }
  }
  if (n_used + n_unused != blocks_.size() || n_used != used_.size() || n_unused != unused_.size()) {
    throw InvariantViolation("used/unused partition broken");
  }
}

// ---------------------------------------------------------------------------
// Snapshots

namespace {

std::string_view state_name(BlockState s) { return s == BlockState::Used ? "used" : "unused"; }

}  // namespace

nlohmann::json Disk::to_json() const {
  using nlohmann::json;
  json blocks = json::array();
  for (const auto& b : blocks_) {
    json jb = {
        {"state", state_name(b.state)},
        {"hf", b.factors.hf},
        {"uf", b.factors.uf},
        {"sf", b.factors.sf},
        {"lf", b.factors.lf},
        {"payload_version", b.payload.version},
    };
    if (b.payload.bytes.empty()) {
      jb["content"] = nullptr;
    } else {
      std::string hex;
      hex.reserve(b.payload.bytes.size() * 2);
      const auto* raw = reinterpret_cast<const unsigned char*>(b.payload.bytes.data());
      boost::algorithm::hex_lower(raw, raw + b.payload.bytes.size(), std::back_inserter(hex));
      jb["content"] = std::move(hex);
    }
    if (b.mrpf) {
      jb["mrpf"] = {{"file_id", b.mrpf->file_id},
                    {"siblings", std::vector<BlockAddress>(b.mrpf->siblings().begin(),
                                                           b.mrpf->siblings().end())},
                    {"epoch", b.mrpf->content_epoch}};
    } else {
      jb["mrpf"] = nullptr;
    }
    blocks.push_back(std::move(jb));
  }
  return {
      {"format", "apex-disk"},
      {"version", kDiskSnapshotVersion},
      {"geometry",
       {{"rows", geometry_.rows},
        {"cols", geometry_.cols},
        {"block_size_bytes", geometry_.block_size_bytes},
        {"neighborhood", to_string(geometry_.neighborhood)}}},
      {"hyperparams",
       {{"lambda", hyperparams_.lambda},
        {"sigma", hyperparams_.sigma},
        {"rho", hyperparams_.rho},
        {"mu", hyperparams_.mu}}},
      {"clock", clock_},
      {"blocks", std::move(blocks)},
  };
}

Disk Disk::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "apex-disk") throw InvalidArgument("not a disk snapshot");
    if (doc.at("version") != kDiskSnapshotVersion) {
      throw InvalidArgument("unsupported disk snapshot version");
    }
    const auto& g = doc.at("geometry");
    DiskGeometry geometry{g.at("rows").get<std::uint32_t>(), g.at("cols").get<std::uint32_t>(),
                          g.at("block_size_bytes").get<std::uint32_t>(),
                          parse_neighborhood(g.at("neighborhood").get<std::string>())};
    const auto& h = doc.at("hyperparams");
    Hyperparams hp{h.at("lambda").get<int>(), h.at("sigma").get<int>(), h.at("rho").get<int>(),
                   h.at("mu").get<int>()};
    Disk disk(geometry, hp);
    const auto& blocks = doc.at("blocks");
    if (blocks.size() != disk.block_count()) throw InvalidArgument("block count mismatch");
    disk.unused_ = PriorityIndex(disk.block_count());
    for (std::size_t a = 0; a < blocks.size(); ++a) {
      const auto& jb = blocks[a];
      Block& b = disk.blocks_[a];
      b.state = jb.at("state") == "used" ? BlockState::Used : BlockState::Unused;
      b.factors.hf = jb.at("hf").get<std::uint64_t>();
      b.factors.uf = jb.at("uf").get<std::uint64_t>();
      b.factors.sf = jb.at("sf").get<double>();
      b.factors.lf = jb.at("lf").get<int>();
      b.payload.version = jb.at("payload_version").get<std::uint64_t>();
      if (!jb.at("content").is_null()) {
        const auto hex = jb.at("content").get<std::string>();
        std::string raw;
        boost::algorithm::unhex(hex.begin(), hex.end(), std::back_inserter(raw));
        b.payload.bytes.resize(raw.size());
        std::memcpy(b.payload.bytes.data(), raw.data(), raw.size());
      }
      if (!jb.at("mrpf").is_null()) {
        const auto& m = jb.at("mrpf");
        b.mrpf = MrpfRecord{m.at("file_id").get<FileId>(),
                            std::make_shared<const std::vector<BlockAddress>>(
                                m.at("siblings").get<std::vector<BlockAddress>>()),
                            m.at("epoch").get<std::uint64_t>()};
      }
      if (b.state == BlockState::Used) {
        disk.used_.insert(b.index);
      } else {
        disk.unused_.insert(b.index, disk.priority(b.index));
      }
    }
    disk.clock_ = doc.at("clock").get<Tick>();
    // Sibling vectors are shared per lineage in a live disk; re-share them.
    for (auto& b : disk.blocks_) {
      if (!b.mrpf) continue;
      for (auto s : b.mrpf->siblings()) {
        auto& other = disk.blocks_.at(s).mrpf;
        if (other && other->same_lineage(*b.mrpf) && other->sibling_blocks != b.mrpf->sibling_blocks &&
            *other->sibling_blocks == *b.mrpf->sibling_blocks) {
          other->sibling_blocks = b.mrpf->sibling_blocks;
        }
      }
    }
    try {
      disk.check_invariants();
    } catch (const InvariantViolation& e) {
      throw InvalidArgument(std::string("inconsistent disk snapshot: ") + e.what());
    }
    return disk;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed disk snapshot: ") + e.what());
  } catch (const boost::algorithm::hex_decode_error&) {
    throw InvalidArgument("malformed disk snapshot: bad block content");
  }
}

}  // namespace apex
