#include "apex/vfs.hpp"

#include <algorithm>
#include <memory>
#include <sstream>

#include "apex/priority.hpp"

namespace apex {

std::string to_string(const AllocationPolicy& policy) {
  switch (policy.kind) {
    case AllocationPolicy::Kind::Apex:
      return "apex";
    case AllocationPolicy::Kind::FirstFit:
      return "first-fit";
    case AllocationPolicy::Kind::Random:
      return "random";
  }
  return "?";
}

std::string_view to_string(LinkingMode mode) {
  return mode == LinkingMode::Literal ? "literal" : "inverted";
}

LinkingMode parse_linking_mode(std::string_view text) {
  if (text == "literal") return LinkingMode::Literal;
  if (text == "inverted") return LinkingMode::Inverted;
  throw InvalidArgument("unknown linking mode '" + std::string(text) + "'");
}

namespace {

std::vector<std::string_view> split_path(std::string_view path) {
  if (path.empty() || path.front() != '/') {
    throw InvalidArgument("path must be absolute: '" + std::string(path) + "'");
  }
  std::vector<std::string_view> parts;
  std::size_t pos = 1;
  while (pos <= path.size()) {
    auto next = path.find('/', pos);
    if (next == std::string_view::npos) next = path.size();
    auto part = path.substr(pos, next - pos);
    if (part.empty() && next != path.size()) {
      throw InvalidArgument("empty path component in '" + std::string(path) + "'");
    }
    if (part == "." || part == "..") {
      throw InvalidArgument("relative component in '" + std::string(path) + "'");
    }
    if (!part.empty()) parts.push_back(part);
    pos = next + 1;
  }
  return parts;
}

auto child_position(std::vector<PathNode>& children, std::string_view name) {
  return std::lower_bound(children.begin(), children.end(), name,
                          [](const PathNode& n, std::string_view key) { return n.name < key; });
}

const PathNode* find_child(const PathNode& dir, std::string_view name) {
  auto it = std::lower_bound(dir.children.begin(), dir.children.end(), name,
                             [](const PathNode& n, std::string_view key) { return n.name < key; });
  return it != dir.children.end() && it->name == name ? &*it : nullptr;
}

}  // namespace

FileSystem::FileSystem(DiskGeometry geometry, Hyperparams hyperparams, FsOptions options)
    : disk_(geometry, hyperparams), options_(options), policy_rng_(options.policy.seed) {
  root_.name = "/";
}

int FileSystem::linking_factor(TypeClass t) const {
  const bool linked = t == TypeClass::Linked;
  return options_.linking == LinkingMode::Literal ? (linked ? 1 : 0) : (linked ? 0 : 1);
}

void FileSystem::emit(const DiskEvent& event) {
  if (sink_) sink_->on_event(event);
}

const PathNode* FileSystem::lookup(std::string_view path) const {
  const PathNode* node = &root_;
  for (auto part : split_path(path)) {
    if (node->kind != PathNode::Kind::Directory) return nullptr;
    node = find_child(*node, part);
    if (!node) return nullptr;
  }
  return node;
}

PathNode* FileSystem::lookup(std::string_view path) {
  return const_cast<PathNode*>(std::as_const(*this).lookup(path));
}

PathNode& FileSystem::parent_directory(std::string_view path, std::string& leaf) {
  auto parts = split_path(path);
  if (parts.empty()) throw InvalidArgument("path names the root directory");
  leaf = std::string(parts.back());
  PathNode* node = &root_;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    const PathNode* child = find_child(*node, parts[i]);
    if (!child || child->kind != PathNode::Kind::Directory) {
      throw NotFound("missing parent directory for '" + std::string(path) + "'");
    }
    node = const_cast<PathNode*>(child);
  }
  if (find_child(*node, leaf)) throw AlreadyExists("path already exists: '" + std::string(path) + "'");
  return *node;
}

void FileSystem::make_directory(std::string_view path) {
  std::string leaf;
  PathNode& parent = parent_directory(path, leaf);
  PathNode dir;
  dir.name = leaf;
  dir.kind = PathNode::Kind::Directory;
  parent.children.insert(child_position(parent.children, leaf), std::move(dir));
}

std::vector<BlockAddress> FileSystem::choose_blocks(std::size_t count) {
  if (count > disk_.unused().size()) {
    throw DiskFull("need " + std::to_string(count) + " free blocks, have " +
                   std::to_string(disk_.unused().size()));
  }
  switch (options_.policy.kind) {
    case AllocationPolicy::Kind::Apex:
      return top_unused(disk_, count);
    case AllocationPolicy::Kind::FirstFit: {
      std::vector<BlockAddress> out;
      out.reserve(count);
      for (const auto& b : disk_.blocks()) {
        if (out.size() == count) break;
        if (b.state == BlockState::Unused) out.push_back(b.index);
      }
      return out;
    }
    case AllocationPolicy::Kind::Random: {
      std::vector<BlockAddress> pool;
      pool.reserve(disk_.unused().size());
      for (const auto& b : disk_.blocks()) {
        if (b.state == BlockState::Unused) pool.push_back(b.index);
      }
      for (std::size_t i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
        std::swap(pool[i], pool[pick(policy_rng_)]);
      }
      pool.resize(count);
      return pool;
    }
  }
  throw InvariantViolation("unknown allocation policy");
}

const FileRecord& FileSystem::create_file(std::string_view path, std::uint64_t size_bytes,
                                          std::optional<TypeClass> type_class) {
  std::string leaf;
  PathNode& parent = parent_directory(path, leaf);
  const std::uint64_t bs = disk_.geometry().block_size_bytes;
  const std::size_t count = static_cast<std::size_t>((size_bytes + bs - 1) / bs) + 1;
  if (count > disk_.unused().size()) {
    throw DiskFull("'" + std::string(path) + "' needs " + std::to_string(count) +
                   " blocks, " + std::to_string(disk_.unused().size()) + " free");
  }

  const auto chosen = choose_blocks(count);
  const TypeClass type = type_class.value_or(type_class_for_path(path));
  const FileId id = files_.size() + 1;
  const std::uint64_t epoch = next_epoch_++;
  const Tick tick = disk_.clock();

  std::vector<std::pair<BlockAddress, MrpfRecord>> overwritten;
  for (auto a : chosen) {
    if (const auto& m = disk_.block(a).mrpf) overwritten.emplace_back(a, *m);
  }
  for (auto a : chosen) {
    auto factors = disk_.transition(a, Direction::ToUsed);
    factors.lf = linking_factor(type);
    disk_.set_factors(a, factors);
    disk_.reset_payload(a);
  }
  for (const auto& [a, lineage] : overwritten) record_overwrite_event(disk_, a, lineage);

  auto siblings = std::make_shared<std::vector<BlockAddress>>(chosen);
  std::sort(siblings->begin(), siblings->end());
  std::shared_ptr<const std::vector<BlockAddress>> shared = std::move(siblings);
  for (auto a : chosen) disk_.set_mrpf(a, MrpfRecord{id, shared, epoch});

  FileRecord record;
  record.id = id;
  record.path = std::string(path);
  record.type_class = type;
  record.status = FileStatus::Used;
  record.block_list = chosen;
  record.size_bytes = size_bytes;
  record.uf_counter = 1;
  record.content_epoch = epoch;
  record.created_tick = tick;
  record.last_access_tick = tick;
  files_.push_back(std::move(record));
  live_.push_back(id);

  PathNode node;
  node.name = leaf;
  node.kind = PathNode::Kind::File;
  node.file = id;
  parent.children.insert(child_position(parent.children, leaf), std::move(node));

  if (sink_) {
    emit(AllocateEvent{tick, id, type, chosen});
    for (auto a : chosen) emit(BlockWriteEvent{tick, a, id, disk_.block(a).payload.version});
  }
  return files_.back();
}

FileRecord& FileSystem::live_file(std::string_view path) {
  const PathNode* node = lookup(path);
  if (!node || node->kind != PathNode::Kind::File) {
    for (const auto& f : files_) {
      if (f.path == path && f.status != FileStatus::Used) {
        throw NotFound("file '" + std::string(path) + "' is already deleted");
      }
    }
    throw NotFound("no such file: '" + std::string(path) + "'");
  }
  return files_.at(node->file - 1);
}

void FileSystem::delete_file(std::string_view path) {
  FileRecord& f = live_file(path);
  f.final_versions.clear();
  for (auto a : f.block_list) {
    disk_.transition(a, Direction::ToUnused);
    f.final_versions.push_back(disk_.block(a).payload.version);
  }
  f.status = FileStatus::Deleted;
  f.deleted_tick = disk_.clock();
  pending_deleted_.push_back(f.id);

  auto it = std::find(live_.begin(), live_.end(), f.id);
  *it = live_.back();
  live_.pop_back();

  std::string leaf;
  auto parts = split_path(path);
  PathNode* dir = &root_;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    dir = const_cast<PathNode*>(find_child(*dir, parts[i]));
  }
  dir->children.erase(child_position(dir->children, parts.back()));

  emit(DeallocateEvent{disk_.clock(), f.id, f.block_list});
}

std::vector<std::byte> FileSystem::read_file(std::string_view path) {
  FileRecord& f = live_file(path);
  const std::size_t bs = disk_.geometry().block_size_bytes;
  std::vector<std::byte> out(f.size_bytes, std::byte{0});
  for (std::size_t i = 1; i < f.block_list.size(); ++i) {
    const auto& bytes = disk_.block(f.block_list[i]).payload.bytes;
    if (bytes.empty()) continue;
    const std::size_t begin = (i - 1) * bs;
    const std::size_t len = std::min<std::size_t>(bs, f.size_bytes - begin);
    std::copy_n(bytes.begin(), len, out.begin() + static_cast<std::ptrdiff_t>(begin));
  }
  record_file_access(disk_, f);
  emit(AccessEvent{disk_.clock(), f.id});
  return out;
}

void FileSystem::write_file(std::string_view path, std::uint64_t offset,
                            std::span<const std::byte> bytes) {
  FileRecord& f = live_file(path);
  if (offset > f.size_bytes || bytes.size() > f.size_bytes - offset) {
    throw InvalidArgument("write of " + std::to_string(bytes.size()) + " bytes at offset " +
                          std::to_string(offset) + " exceeds size of '" + f.path + "'");
  }
  const std::uint64_t bs = disk_.geometry().block_size_bytes;
  std::uint64_t pos = offset;
  std::size_t consumed = 0;
  while (consumed < bytes.size()) {
    const std::uint64_t data_index = pos / bs;
    const std::uint64_t within = pos % bs;
    const std::size_t chunk = static_cast<std::size_t>(std::min<std::uint64_t>(bs - within, bytes.size() - consumed));
    const BlockAddress a = f.block_list[data_index + 1];
    disk_.write_payload(a, within, bytes.subspan(consumed, chunk));
    emit(BlockWriteEvent{disk_.clock(), a, f.id, disk_.block(a).payload.version});
    consumed += chunk;
    pos += chunk;
  }
  record_file_access(disk_, f);
  emit(AccessEvent{disk_.clock(), f.id});
}

std::size_t FileSystem::mark_obsolete_sweep() {
  std::size_t transitioned = 0;
  std::erase_if(pending_deleted_, [&](FileId id) {
    FileRecord& f = files_[id - 1];
    for (auto a : f.block_list) {
      const auto& m = disk_.block(a).mrpf;
      if (m && m->file_id == f.id && m->content_epoch == f.content_epoch) return false;
    }
    f.status = FileStatus::Obsolete;
    ++transitioned;
    return true;
  });
  return transitioned;
}

void FileSystem::update_spatial_factors() {
  apex::update_spatial_factors(disk_);
  emit(SpatialPassEvent{disk_.clock()});
}

const FileRecord* FileSystem::find_file(std::string_view path) const {
  const PathNode* node = lookup(path);
  if (!node || node->kind != PathNode::Kind::File) return nullptr;
  return &files_[node->file - 1];
}

const FileRecord& FileSystem::file(FileId id) const {
  if (id == 0 || id > files_.size()) throw NotFound("no file with id " + std::to_string(id));
  return files_[id - 1];
}

void FileSystem::check_invariants() const {
  disk_.check_invariants();
  std::vector<FileId> owner(disk_.block_count(), 0);
  for (auto id : live_) {
    const auto& f = files_[id - 1];
    if (f.status != FileStatus::Used) throw InvariantViolation("live list holds a non-used file");
    for (auto a : f.block_list) {
      if (owner[a] != 0) throw InvariantViolation("block " + std::to_string(a) + " double-owned");
      owner[a] = id;
      const auto& b = disk_.block(a);
      if (b.state != BlockState::Used) throw InvariantViolation("used file on an unused block");
      if (!b.mrpf || b.mrpf->file_id != id) throw InvariantViolation("mrpf does not name owner");
    }
  }
  std::size_t used_files = 0;
  for (const auto& f : files_) used_files += f.status == FileStatus::Used ? 1 : 0;
  if (used_files != live_.size()) throw InvariantViolation("live list out of sync");
  for (const auto& b : disk_.blocks()) {
    if (b.state == BlockState::Used && owner[b.index] == 0) {
      throw InvariantViolation("used block " + std::to_string(b.index) + " has no owner");
    }
  }
}

// ---------------------------------------------------------------------------
// Snapshots

namespace {

void collect_directories(const PathNode& node, const std::string& prefix,
                         std::vector<std::string>& out) {
  for (const auto& child : node.children) {
    if (child.kind != PathNode::Kind::Directory) continue;
    std::string path = prefix + "/" + child.name;
    out.push_back(path);
    collect_directories(child, path, out);
  }
}

std::string_view policy_kind_name(AllocationPolicy::Kind k) {
  switch (k) {
    case AllocationPolicy::Kind::Apex:
      return "apex";
    case AllocationPolicy::Kind::FirstFit:
      return "first-fit";
    case AllocationPolicy::Kind::Random:
      return "random";
  }
  return "?";
}

AllocationPolicy::Kind parse_policy_kind(std::string_view s) {
  if (s == "apex") return AllocationPolicy::Kind::Apex;
  if (s == "first-fit") return AllocationPolicy::Kind::FirstFit;
  if (s == "random") return AllocationPolicy::Kind::Random;
  throw InvalidArgument("unknown policy '" + std::string(s) + "'");
}

FileStatus parse_status(std::string_view s) {
  if (s == "used") return FileStatus::Used;
  if (s == "deleted") return FileStatus::Deleted;
  if (s == "obsolete") return FileStatus::Obsolete;
  throw InvalidArgument("unknown file status '" + std::string(s) + "'");
}

}  // namespace

nlohmann::json FileSystem::to_json() const {
  using nlohmann::json;
  std::vector<std::string> dirs;
  collect_directories(root_, "", dirs);
  json files = json::array();
  for (const auto& f : files_) {
    files.push_back({{"id", f.id},
                     {"path", f.path},
                     {"type", to_string(f.type_class)},
                     {"status", to_string(f.status)},
                     {"blocks", f.block_list},
                     {"size_bytes", f.size_bytes},
                     {"uf", f.uf_counter},
                     {"epoch", f.content_epoch},
                     {"created_tick", f.created_tick},
                     {"last_access_tick", f.last_access_tick},
                     {"deleted_tick", f.deleted_tick},
                     {"final_versions", f.final_versions}});
  }
  std::ostringstream rng;
  rng << policy_rng_;
  return {{"format", "apex-fs"},
          {"version", 1},
          {"options",
           {{"linking", to_string(options_.linking)},
            {"policy", policy_kind_name(options_.policy.kind)},
            {"policy_seed", options_.policy.seed}}},
          {"disk", disk_.to_json()},
          {"directories", dirs},
          {"files", std::move(files)},
          {"live", live_},
          {"pending_deleted", pending_deleted_},
          {"next_epoch", next_epoch_},
          {"policy_rng", rng.str()}};
}

FileSystem FileSystem::from_json(const nlohmann::json& doc) {
  try {
    if (doc.at("format") != "apex-fs" || doc.at("version") != 1) {
      throw InvalidArgument("not a version-1 file system snapshot");
    }
    const auto& o = doc.at("options");
    FsOptions options{parse_linking_mode(o.at("linking").get<std::string>()),
                      {parse_policy_kind(o.at("policy").get<std::string>()),
                       o.at("policy_seed").get<std::uint64_t>()}};
    Disk disk = Disk::from_json(doc.at("disk"));
    FileSystem fs(disk.geometry(), disk.hyperparams(), options);
    fs.disk_ = std::move(disk);
    for (const auto& d : doc.at("directories")) fs.make_directory(d.get<std::string>());
    for (const auto& jf : doc.at("files")) {
      FileRecord f;
      f.id = jf.at("id").get<FileId>();
      f.path = jf.at("path").get<std::string>();
      f.type_class = parse_type_class(jf.at("type").get<std::string>());
      f.status = parse_status(jf.at("status").get<std::string>());
      f.block_list = jf.at("blocks").get<std::vector<BlockAddress>>();
      f.size_bytes = jf.at("size_bytes").get<std::uint64_t>();
      f.uf_counter = jf.at("uf").get<std::uint64_t>();
      f.content_epoch = jf.at("epoch").get<std::uint64_t>();
      f.created_tick = jf.at("created_tick").get<Tick>();
      f.last_access_tick = jf.at("last_access_tick").get<Tick>();
      f.deleted_tick = jf.at("deleted_tick").get<Tick>();
      f.final_versions = jf.at("final_versions").get<std::vector<std::uint64_t>>();
      if (f.id != fs.files_.size() + 1) throw InvalidArgument("file ids must be dense and ordered");
      fs.files_.push_back(std::move(f));
    }
    fs.live_ = doc.at("live").get<std::vector<FileId>>();
    for (auto id : fs.live_) {
      const auto& f = fs.file(id);
      std::string leaf;
      PathNode& parent = fs.parent_directory(f.path, leaf);
      PathNode node;
      node.name = leaf;
      node.kind = PathNode::Kind::File;
      node.file = id;
      parent.children.insert(child_position(parent.children, leaf), std::move(node));
    }
    fs.pending_deleted_ = doc.at("pending_deleted").get<std::vector<FileId>>();
    fs.next_epoch_ = doc.at("next_epoch").get<std::uint64_t>();
    std::istringstream rng(doc.at("policy_rng").get<std::string>());
    rng >> fs.policy_rng_;
    try {
      fs.check_invariants();
    } catch (const InvariantViolation& e) {
      throw InvalidArgument(std::string("inconsistent file system snapshot: ") + e.what());
    }
    return fs;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidArgument(std::string("malformed file system snapshot: ") + e.what());
  }
}

}  // namespace apex
