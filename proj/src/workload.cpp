#include "apex/workload.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "apex/digest.hpp"

namespace apex {

void WorkloadConfig::validate() const {
  if (max_file_blocks == 0) throw InvalidArgument("max_file_blocks must be positive");
  if (!(linked_file_percent >= 0.0 && linked_file_percent <= 100.0)) {
    throw InvalidArgument("linked_file_percent must lie in [0,100]");
  }
  if (!(linked_jitter >= 0.0)) throw InvalidArgument("linked_jitter must be non-negative");
  if (!(min_utilization >= 0.0 && min_utilization < 1.0)) {
    throw InvalidArgument("min_utilization must lie in [0,1)");
  }
  const double sum = op_mix.read_write + op_mix.create + op_mix.remove;
  if (op_mix.read_write < 0 || op_mix.create < 0 || op_mix.remove < 0 || std::abs(sum - 1.0) > 1e-9) {
    throw InvalidArgument("op mix must be non-negative and sum to 1");
  }
}

std::string_view to_string(WorkloadOp::Kind kind) {
  switch (kind) {
    case WorkloadOp::Kind::Create:
      return "create";
    case WorkloadOp::Kind::Delete:
      return "delete";
    case WorkloadOp::Kind::Read:
      return "read";
    case WorkloadOp::Kind::Write:
      return "write";
  }
  return "?";
}

void OpCounts::add(WorkloadOp::Kind kind) {
  switch (kind) {
    case WorkloadOp::Kind::Create:
      ++create;
      break;
    case WorkloadOp::Kind::Delete:
      ++remove;
      break;
    case WorkloadOp::Kind::Read:
      ++read;
      break;
    case WorkloadOp::Kind::Write:
      ++write;
      break;
  }
}

// ---------------------------------------------------------------------------
// Generation

namespace {

constexpr std::array<std::string_view, 3> kLinkedExtensions = {".exe", ".o", ".zip"};
constexpr std::array<std::string_view, 5> kPartialExtensions = {".txt", ".jpg", ".mp3", ".avi", ".pdf"};

}  // namespace

WorkloadGenerator::WorkloadGenerator(WorkloadConfig config)
    : config_(config), rng_(config.rng_seed) {
  config_.validate();
}

FileId WorkloadGenerator::pick_live(const FileSystem& fs) {
  const auto live = fs.live_files();
  std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
  return live[pick(rng_)];
}

WorkloadOp WorkloadGenerator::make_create(const FileSystem& fs, Tick tick) {
  std::uniform_int_distribution<std::uint32_t> size_dist(1, config_.max_file_blocks);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  WorkloadOp op;
  op.kind = WorkloadOp::Kind::Create;
  op.tick = tick;
  op.size_blocks = size_dist(rng_);

  double percent = config_.linked_file_percent;
  if (config_.linked_jitter > 0.0) {
    std::uniform_real_distribution<double> jitter(-config_.linked_jitter, config_.linked_jitter);
    percent = std::clamp(percent + jitter(rng_), 0.0, 100.0);
  }
  op.type_class = unit(rng_) < percent / 100.0 ? TypeClass::Linked : TypeClass::Partial;
  std::string_view ext;
  if (op.type_class == TypeClass::Linked) {
    std::uniform_int_distribution<std::size_t> e(0, kLinkedExtensions.size() - 1);
    ext = kLinkedExtensions[e(rng_)];
  } else {
    std::uniform_int_distribution<std::size_t> e(0, kPartialExtensions.size() - 1);
    ext = kPartialExtensions[e(rng_)];
  }
  do {
    op.path = "/f" + std::to_string(next_name_++) + std::string(ext);
  } while (fs.find_file(op.path) != nullptr);

  const std::size_t free = fs.disk().unused().size();
  if (free < 2) {
    ++enforcement_.create_fallback_read;
    WorkloadOp read;
    read.kind = WorkloadOp::Kind::Read;
    read.tick = tick;
    read.path = fs.file(pick_live(fs)).path;
    return read;
  }
  if (free < std::size_t{op.size_blocks} + 1) {
    ++enforcement_.create_clamped;
    op.size_blocks = static_cast<std::uint32_t>(free - 1);
  }
  return op;
}

WorkloadOp WorkloadGenerator::next(const FileSystem& fs, Tick tick) {
  if (fs.live_files().empty()) {
    ++enforcement_.forced_create;
    return make_create(fs, tick);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng_);
  const auto& mix = config_.op_mix;

  if (u < mix.read_write) {
    const bool is_read = unit(rng_) < 0.5;
    const FileRecord& f = fs.file(pick_live(fs));
    WorkloadOp op;
    op.tick = tick;
    op.path = f.path;
    if (is_read) {
      op.kind = WorkloadOp::Kind::Read;
      return op;
    }
    op.kind = WorkloadOp::Kind::Write;
    const std::uint64_t bs = fs.disk().geometry().block_size_bytes;
    const std::size_t data = f.data_block_count();
    if (data > 0 && f.size_bytes > 0) {
      std::uniform_int_distribution<std::size_t> which(0, data - 1);
      op.offset = which(rng_) * bs;
      op.length = std::min<std::uint64_t>(bs, f.size_bytes - op.offset);
    }
    return op;
  }
  if (u < mix.read_write + mix.create) return make_create(fs, tick);

  const FileRecord& victim = fs.file(pick_live(fs));
  const auto total = static_cast<double>(fs.disk().block_count());
  const auto after = static_cast<double>(fs.disk().used().size() - victim.block_list.size());
  if (after / total < config_.min_utilization) {
    ++enforcement_.delete_redispatched;
    return make_create(fs, tick);
  }
  WorkloadOp op;
  op.kind = WorkloadOp::Kind::Delete;
  op.tick = tick;
  op.path = victim.path;
  return op;
}

// ---------------------------------------------------------------------------
// Execution

std::vector<std::byte> write_content(Tick tick, std::size_t length) {
  std::mt19937_64 gen(tick * 0x9e3779b97f4a7c15ULL + 1);
  std::vector<std::byte> out(length);
  for (std::size_t i = 0; i < length; i += 8) {
    const std::uint64_t word = gen();
    std::memcpy(out.data() + i, &word, std::min<std::size_t>(8, length - i));
  }
  return out;
}

void apply_op(FileSystem& fs, const WorkloadOp& op) {
  fs.disk().advance_clock_to(op.tick);
  switch (op.kind) {
    case WorkloadOp::Kind::Create:
      fs.create_file(op.path, std::uint64_t{op.size_blocks} * fs.disk().geometry().block_size_bytes,
                     op.type_class);
      break;
    case WorkloadOp::Kind::Delete:
      fs.delete_file(op.path);
      break;
    case WorkloadOp::Kind::Read:
      fs.read_file(op.path);
      break;
    case WorkloadOp::Kind::Write: {
      const auto content = write_content(op.tick, op.length);
      fs.write_file(op.path, op.offset, content);
      break;
    }
  }
  fs.update_spatial_factors();
  fs.mark_obsolete_sweep();
}

Simulation::Simulation(WorkloadConfig config, FileSystem& fs) : generator_(config), fs_(&fs) {
  if (fs.disk().block_count() < 2) {
    throw InvalidArgument("simulation needs at least two blocks (metadata + data)");
  }
}

WorkloadOp Simulation::step() {
  const Tick tick = fs_->disk().clock() + 1;
  WorkloadOp op = generator_.next(*fs_, tick);
  try {
    apply_op(*fs_, op);
  } catch (const InvariantViolation&) {
    throw;
  } catch (const Error& e) {
    throw InvariantViolation(std::string("generated op failed at tick ") + std::to_string(tick) +
                             ": " + e.what());
  }
  return op;
}

namespace {

SimReport finish_report(const FileSystem& fs, const PerfWeights& weights) {
  SimReport report;
  report.weights = weights;
  report.perf = performance_breakdown(fs, weights);
  report.utilization = fs.disk().utilization();
  report.recovery = recovery_table(fs);
  report.snapshot_digest = snapshot_digest(fs);
  return report;
}

}  // namespace

SimReport run_simulation(const WorkloadConfig& config, FileSystem& fs, const PerfWeights& weights,
                         const StepObserver& observer) {
  weights.validate();
  Simulation sim(config, fs);
  std::vector<WorkloadOp> trace;
  trace.reserve(config.total_ops);
  OpCounts counts;
  for (std::uint64_t i = 0; i < config.total_ops; ++i) {
    trace.push_back(sim.step());
    counts.add(trace.back().kind);
    if (observer) observer(trace.back(), fs);
  }
  SimReport report = finish_report(fs, weights);
  report.seed = config.rng_seed;
  report.total_ops = config.total_ops;
  report.counts = counts;
  report.enforcement = sim.generator().enforcement();
  report.trace = std::move(trace);
  return report;
}

SimReport replay_trace(const std::vector<WorkloadOp>& trace, FileSystem& fs,
                       const PerfWeights& weights, const StepObserver& observer) {
  weights.validate();
  Tick last = fs.disk().clock();
  for (std::size_t i = 0; i < trace.size(); ++i) {
    if (trace[i].tick <= last) {
      throw InvalidArgument("trace op " + std::to_string(i + 1) + " has tick " +
                            std::to_string(trace[i].tick) + ", not after " + std::to_string(last));
    }
    last = trace[i].tick;
  }
  OpCounts counts;
  for (const auto& op : trace) {
    apply_op(fs, op);
    counts.add(op.kind);
    if (observer) observer(op, fs);
  }
  SimReport report = finish_report(fs, weights);
  report.total_ops = trace.size();
  report.counts = counts;
  report.trace = trace;
  return report;
}

nlohmann::json SimReport::to_json() const {
  return {
      {"seed", seed},
      {"total_ops", total_ops},
      {"counts",
       {{"create", counts.create}, {"delete", counts.remove}, {"read", counts.read},
        {"write", counts.write}}},
      {"enforcement",
       {{"forced_create", enforcement.forced_create},
        {"delete_redispatched", enforcement.delete_redispatched},
        {"create_clamped", enforcement.create_clamped},
        {"create_fallback_read", enforcement.create_fallback_read}}},
      {"weights",
       {{"alpha", weights.alpha}, {"beta", weights.beta}, {"aat_mode", to_string(weights.aat_mode)}}},
      {"performance",
       {{"weighted_rr", perf.weighted_rr}, {"access_time", perf.access_time}, {"p", perf.p}}},
      {"utilization", utilization},
      {"recovery", recovery_table_json(recovery)},
      {"trace_length", trace.size()},
      {"snapshot_digest", snapshot_digest},
  };
}

// ---------------------------------------------------------------------------
// Trace I/O

nlohmann::json op_to_json(const WorkloadOp& op) {
  nlohmann::json j = {{"tick", op.tick}, {"op", to_string(op.kind)}, {"path", op.path}};
  if (op.kind == WorkloadOp::Kind::Create) {
    j["size_blocks"] = op.size_blocks;
    j["type"] = to_string(op.type_class);
  } else if (op.kind == WorkloadOp::Kind::Write) {
    j["offset"] = op.offset;
    j["len"] = op.length;
  }
  return j;
}

WorkloadOp op_from_json(const nlohmann::json& j) {
  WorkloadOp op;
  op.tick = j.at("tick").get<Tick>();
  op.path = j.at("path").get<std::string>();
  const auto kind = j.at("op").get<std::string>();
  if (kind == "create") {
    op.kind = WorkloadOp::Kind::Create;
    op.size_blocks = j.at("size_blocks").get<std::uint32_t>();
    op.type_class = j.contains("type") ? parse_type_class(j.at("type").get<std::string>())
                                       : type_class_for_path(op.path);
  } else if (kind == "delete") {
    op.kind = WorkloadOp::Kind::Delete;
  } else if (kind == "read") {
    op.kind = WorkloadOp::Kind::Read;
  } else if (kind == "write") {
    op.kind = WorkloadOp::Kind::Write;
    op.offset = j.value("offset", std::uint64_t{0});
    op.length = j.value("len", std::uint64_t{0});
  } else {
    throw InvalidArgument("unknown op '" + kind + "'");
  }
  return op;
}

void write_trace(std::ostream& out, const std::vector<WorkloadOp>& trace) {
  for (const auto& op : trace) out << op_to_json(op).dump() << '\n';
}

std::vector<WorkloadOp> read_trace(std::istream& in) {
  std::vector<WorkloadOp> trace;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      trace.push_back(op_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("malformed trace line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InvalidArgument& e) {
      throw InvalidArgument("malformed trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return trace;
}

std::string snapshot_digest(const FileSystem& fs) { return hex_digest(fs.to_json().dump()); }

}  // namespace apex
