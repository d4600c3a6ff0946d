#include "apex/recovery.hpp"

#include <cmath>
#include <sstream>

namespace apex {

std::string_view to_string(AatMode mode) {
  return mode == AatMode::SeekCost ? "seek-cost" : "timestamp";
}

AatMode parse_aat_mode(std::string_view text) {
  if (text == "seek-cost") return AatMode::SeekCost;
  if (text == "timestamp") return AatMode::TimestampLiteral;
  throw InvalidArgument("unknown access-time mode '" + std::string(text) + "'");
}

void PerfWeights::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0) || !(beta >= 0.0 && beta <= 1.0)) {
    throw InvalidArgument("alpha and beta must lie in [0,1]");
  }
  if (std::abs(alpha + beta - 1.0) > 1e-9) throw InvalidArgument("alpha + beta must equal 1");
}

RecoveryResult recover_file(const Disk& disk, const FileRecord& file) {
  if (file.status == FileStatus::Used) {
    throw InvalidArgument("file '" + file.path + "' is live; nothing to recover");
  }
  RecoveryResult r;
  r.file_id = file.id;
  r.total_blocks = file.block_list.size();
  std::size_t surviving_data = 0;
  for (std::size_t i = 0; i < file.block_list.size(); ++i) {
    const Block& b = disk.block(file.block_list[i]);
    const bool survives = b.state == BlockState::Unused && b.mrpf && b.mrpf->file_id == file.id &&
                          b.mrpf->content_epoch == file.content_epoch &&
                          i < file.final_versions.size() &&
                          b.payload.version == file.final_versions[i];
    if (!survives) continue;
    r.surviving_blocks.push_back(b.index);
    if (i == 0) {
      r.metadata_intact = true;
    } else {
      ++surviving_data;
    }
  }
  const bool complete = r.surviving_blocks.size() == r.total_blocks && r.total_blocks > 0;
  if (file.type_class == TypeClass::Linked) {
    r.rr = complete ? 1.0 : 0.0;
    r.recovered_bytes = complete ? file.size_bytes : 0;
  } else if (!r.metadata_intact) {
    r.rr = 0.0;
    r.recovered_bytes = 0;
  } else if (file.size_bytes == 0) {
    r.rr = 1.0;
  } else {
    const std::uint64_t bs = disk.geometry().block_size_bytes;
    r.recovered_bytes = std::min<std::uint64_t>(bs * surviving_data, file.size_bytes);
    r.rr = static_cast<double>(r.recovered_bytes) / static_cast<double>(file.size_bytes);
  }
  return r;
}

double weighted_rr(const Disk& disk, std::span<const FileRecord* const> files) {
  double num = 0.0;
  double den = 0.0;
  for (const auto* f : files) {
    const auto uf = static_cast<double>(f->uf_counter);
    num += recover_file(disk, *f).rr * uf;
    den += uf;
  }
  return den == 0.0 ? 0.0 : 100.0 * num / den;
}

std::string_view to_string(DeletedScope scope) {
  return scope == DeletedScope::All ? "all" : "fragments";
}

DeletedScope parse_deleted_scope(std::string_view text) {
  if (text == "all") return DeletedScope::All;
  if (text == "fragments") return DeletedScope::Fragments;
  throw InvalidArgument("unknown deleted-file scope '" + std::string(text) + "'");
}

std::vector<const FileRecord*> deleted_files(const FileSystem& fs, DeletedScope scope) {
  std::vector<const FileRecord*> out;
  if (scope == DeletedScope::Fragments) {
    for (auto id : fs.deleted_with_fragments()) out.push_back(&fs.file(id));
    return out;
  }
  for (const auto& f : fs.files()) {
    if (f.status != FileStatus::Used) out.push_back(&f);
  }
  return out;
}

double weighted_rr(const FileSystem& fs, DeletedScope scope) {
  const auto files = deleted_files(fs, scope);
  return weighted_rr(fs.disk(), files);
}

double seek_cost(const FileRecord& file, std::size_t total_blocks) {
  if (file.block_list.size() < 2) return 0.0;
  double gaps = 0.0;
  for (std::size_t i = 1; i < file.block_list.size(); ++i) {
    const auto a = static_cast<std::int64_t>(file.block_list[i - 1]);
    const auto b = static_cast<std::int64_t>(file.block_list[i]);
    gaps += static_cast<double>(a > b ? a - b : b - a);
  }
  return gaps / (static_cast<double>(file.block_list.size() - 1) * static_cast<double>(total_blocks));
}

double access_time_term(const FileSystem& fs, AatMode mode) {
  const auto live = fs.live_files();
  double sum = 0.0;
  for (auto id : live) {
    const auto& f = fs.file(id);
    sum += mode == AatMode::TimestampLiteral ? static_cast<double>(f.last_access_tick)
                                             : seek_cost(f, fs.disk().block_count());
  }
  return live.empty() ? 0.0 : sum / static_cast<double>(live.size());
}

PerfBreakdown performance_breakdown(const FileSystem& fs, const PerfWeights& weights,
                                    DeletedScope scope) {
  weights.validate();
  PerfBreakdown out;
  out.weighted_rr = weighted_rr(fs, scope);
  out.access_time = access_time_term(fs, weights.aat_mode);
  out.p = weights.alpha * out.weighted_rr - weights.beta * out.access_time;
  return out;
}

double performance(const FileSystem& fs, const PerfWeights& weights) {
  return performance_breakdown(fs, weights).p;
}

std::vector<RecoveryRow> recovery_table(const FileSystem& fs) {
  std::vector<RecoveryRow> rows;
  for (const auto* f : deleted_files(fs)) {
    const auto r = recover_file(fs.disk(), *f);
    rows.push_back({f->id, f->path, f->type_class, f->status, f->uf_counter,
                    r.surviving_blocks.size(), r.total_blocks, r.metadata_intact, r.rr});
  }
  return rows;
}

nlohmann::json recovery_table_json(std::span<const RecoveryRow> rows) {
  auto out = nlohmann::json::array();
  for (const auto& r : rows) {
    out.push_back({{"file_id", r.file_id},
                   {"path", r.path},
                   {"type", to_string(r.type_class)},
                   {"status", to_string(r.status)},
                   {"uf", r.uf},
                   {"surviving_blocks", r.surviving_blocks},
                   {"total_blocks", r.total_blocks},
                   {"metadata_intact", r.metadata_intact},
                   {"rr", r.rr}});
  }
  return out;
}

std::string recovery_table_csv(std::span<const RecoveryRow> rows) {
  std::ostringstream out;
  out.precision(17);
  out << "file_id,path,type,status,uf,surviving_blocks,total_blocks,metadata_intact,rr\n";
  for (const auto& r : rows) {
    out << r.file_id << ',' << r.path << ',' << to_string(r.type_class) << ','
        << to_string(r.status) << ',' << r.uf << ',' << r.surviving_blocks << ','
        << r.total_blocks << ',' << (r.metadata_intact ? 1 : 0) << ',' << r.rr << '\n';
  }
  return out.str();
}

}  // namespace apex
