#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "apex/recovery.hpp"
#include "apex/vfs.hpp"

namespace apex {

struct OpMix {
  double read_write = 0.70;
  double create = 0.15;
  double remove = 0.15;
};

struct WorkloadConfig {
  std::uint64_t rng_seed = 42;
  std::uint32_t max_file_blocks = 20;  // data blocks; one metadata block is added
  double linked_file_percent = 20.0;
  double linked_jitter = 5.0;  // +/- percentage points per draw
  double min_utilization = 0.70;
  OpMix op_mix;
  std::uint64_t total_ops = 1000;

  void validate() const;
};

struct WorkloadOp {
  enum class Kind { Create, Delete, Read, Write };

  Kind kind = Kind::Create;
  Tick tick = 0;
  std::string path;
  std::uint32_t size_blocks = 0;  // Create: data blocks
  TypeClass type_class = TypeClass::Partial;
  std::uint64_t offset = 0;  // Write: bytes
  std::uint64_t length = 0;

  friend bool operator==(const WorkloadOp&, const WorkloadOp&) = default;
};

std::string_view to_string(WorkloadOp::Kind kind);

// How often generation had to override the sampled operation.
struct EnforcementCounts {
  std::uint64_t forced_create = 0;         // no live file
  std::uint64_t delete_redispatched = 0;   // delete would break the utilization floor
  std::uint64_t create_clamped = 0;        // shrunk to the free space
  std::uint64_t create_fallback_read = 0;  // not even one data block free

  std::uint64_t total() const {
    return forced_create + delete_redispatched + create_clamped + create_fallback_read;
  }
};

class WorkloadGenerator {
 public:
  explicit WorkloadGenerator(WorkloadConfig config);

  // Samples the next operation against the live state; `tick` is stamped
  // as-is.
  WorkloadOp next(const FileSystem& fs, Tick tick);

  const WorkloadConfig& config() const { return config_; }
  const EnforcementCounts& enforcement() const { return enforcement_; }

 private:
  WorkloadOp make_create(const FileSystem& fs, Tick tick);
  FileId pick_live(const FileSystem& fs);

  WorkloadConfig config_;
  std::mt19937_64 rng_;
  std::uint64_t next_name_ = 1;
  EnforcementCounts enforcement_;
};

// Deterministic write payload for an operation tick.
std::vector<std::byte> write_content(Tick tick, std::size_t length);

// Executes one operation through the file system followed by the per-op
// spatial pass and obsolete sweep. The disk clock is moved to op.tick.
void apply_op(FileSystem& fs, const WorkloadOp& op);

struct OpCounts {
  std::uint64_t create = 0;
  std::uint64_t remove = 0;
  std::uint64_t read = 0;
  std::uint64_t write = 0;

  void add(WorkloadOp::Kind kind);
};

struct SimReport {
  std::uint64_t seed = 0;
  std::uint64_t total_ops = 0;
  OpCounts counts;
  EnforcementCounts enforcement;
  PerfWeights weights;
  PerfBreakdown perf;
  double utilization = 0.0;
  std::vector<RecoveryRow> recovery;
  std::vector<WorkloadOp> trace;
  std::string snapshot_digest;

  nlohmann::json to_json() const;
};

using StepObserver = std::function<void(const WorkloadOp&, const FileSystem&)>;

// Drives the generator one operation at a time on a live file system.
class Simulation {
 public:
  Simulation(WorkloadConfig config, FileSystem& fs);

  WorkloadOp step();
  const WorkloadGenerator& generator() const { return generator_; }

 private:
  WorkloadGenerator generator_;
  FileSystem* fs_;
};

SimReport run_simulation(const WorkloadConfig& config, FileSystem& fs,
                         const PerfWeights& weights = {}, const StepObserver& observer = {});

// Re-executes a trace; ticks must be strictly increasing and after the
// current disk clock.
SimReport replay_trace(const std::vector<WorkloadOp>& trace, FileSystem& fs,
                       const PerfWeights& weights = {}, const StepObserver& observer = {});

// JSON-lines: one object per op.
nlohmann::json op_to_json(const WorkloadOp& op);
WorkloadOp op_from_json(const nlohmann::json& j);
void write_trace(std::ostream& out, const std::vector<WorkloadOp>& trace);
std::vector<WorkloadOp> read_trace(std::istream& in);

std::string snapshot_digest(const FileSystem& fs);

}  // namespace apex
