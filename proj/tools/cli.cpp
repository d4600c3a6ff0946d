#include "cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "apex/recovery.hpp"
#include "apex/tuner.hpp"
#include "apex/workload.hpp"
#include "compare.hpp"
#include "config.hpp"

namespace apex::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  std::string policy;
  std::string trace;
  std::string snapshot;
};

std::string utc_stamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream s;
  s << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
  return s.str();
}

// Picks `<command>-<seed>-<stamp>` and appends -N until none of the given
// extensions collide with an existing file.
fs::path output_base(const fs::path& dir, const std::string& command, std::uint64_t seed,
                     const std::vector<std::string>& extensions) {
  fs::create_directories(dir);
  const std::string stem = command + "-" + std::to_string(seed) + "-" + utc_stamp();
  for (int n = 0;; ++n) {
    const fs::path base = dir / (n == 0 ? stem : stem + "-" + std::to_string(n));
    bool taken = false;
    for (const auto& ext : extensions) taken = taken || fs::exists(fs::path(base.string() + ext));
    if (!taken) return base;
  }
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw InvalidArgument("write failed for '" + path.string() + "'");
}

nlohmann::json envelope(const std::string& command, std::uint64_t seed, const AppConfig& config) {
  return {{"command", command}, {"seed", seed}, {"config_hash", config.hash()}, {"config", config.to_json()}};
}

AppConfig resolve(const Options& opt) {
  AppConfig c = opt.config.empty() ? AppConfig{} : load_config(opt.config);
  if (!opt.policy.empty()) c.policy.kind = parse_policy(opt.policy);
  if (opt.seed) {
    c.workload.rng_seed = *opt.seed;
    c.train.agent_seed = *opt.seed;
    c.compare.seeds = {*opt.seed};
    if (c.policy.kind == AllocationPolicy::Kind::Random) c.policy.seed = *opt.seed;
  }
  c.validate();
  return c;
}

FileSystem fresh_fs(const AppConfig& c) { return FileSystem(c.geometry, c.hyperparams, {c.linking, c.policy}); }

std::vector<WorkloadOp> load_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read trace file '" + path + "'");
  return read_trace(in);
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  const AppConfig c = resolve(opt);
  FileSystem fsys = fresh_fs(c);
  const SimReport report = run_simulation(c.workload, fsys, c.weights);
  const auto seed = c.workload.rng_seed;
  const auto base = output_base(opt.out, "simulate", seed, {".json", ".trace.jsonl", ".snapshot.json"});
  auto doc = envelope("simulate", seed, c);
  doc["report"] = report.to_json();
  write_file(base.string() + ".json", doc.dump(2) + "\n");
  std::ostringstream trace;
  write_trace(trace, report.trace);
  write_file(base.string() + ".trace.jsonl", trace.str());
  write_file(base.string() + ".snapshot.json", fsys.to_json().dump() + "\n");
  out << "simulate seed=" << seed << " ops=" << report.total_ops << " P=" << report.perf.p
      << " weighted_rr=" << report.perf.weighted_rr << " utilization=" << report.utilization
      << " digest=" << report.snapshot_digest << " -> " << base.string() << ".json\n";
  return 0;
}

int cmd_replay(const Options& opt, std::ostream& out) {
  if (opt.trace.empty()) throw InvalidArgument("replay needs --trace PATH");
  const AppConfig c = resolve(opt);
  const auto trace = load_trace(opt.trace);
  FileSystem fsys = fresh_fs(c);
  const SimReport report = replay_trace(trace, fsys, c.weights);
  const auto seed = c.workload.rng_seed;
  const auto base = output_base(opt.out, "replay", seed, {".json", ".snapshot.json"});
  auto doc = envelope("replay", seed, c);
  doc["trace_path"] = opt.trace;
  doc["report"] = report.to_json();
  write_file(base.string() + ".json", doc.dump(2) + "\n");
  write_file(base.string() + ".snapshot.json", fsys.to_json().dump() + "\n");
  out << "replay ops=" << report.total_ops << " P=" << report.perf.p
      << " digest=" << report.snapshot_digest << " -> " << base.string() << ".json\n";
  return 0;
}

int cmd_recover(const Options& opt, std::ostream& out) {
  if (opt.trace.empty() == opt.snapshot.empty()) {
    throw InvalidArgument("recover needs exactly one of --trace PATH or --snapshot PATH");
  }
  const AppConfig c = resolve(opt);
  std::optional<FileSystem> fsys;
  if (!opt.snapshot.empty()) {
    std::ifstream in(opt.snapshot);
    if (!in) throw InvalidArgument("cannot read snapshot file '" + opt.snapshot + "'");
    nlohmann::json doc;
    try {
      in >> doc;
    } catch (const nlohmann::json::exception& e) {
      throw InvalidArgument("snapshot '" + opt.snapshot + "' is not JSON: " + e.what());
    }
    fsys.emplace(FileSystem::from_json(doc));
  } else {
    fsys.emplace(fresh_fs(c));
    replay_trace(load_trace(opt.trace), *fsys, c.weights);
  }
  const auto rows = recovery_table(*fsys);
  const auto perf = performance_breakdown(*fsys, c.weights);
  const auto seed = c.workload.rng_seed;
  const auto base = output_base(opt.out, "recover", seed, {".json", ".csv"});
  auto doc = envelope("recover", seed, c);
  doc["source"] = opt.snapshot.empty() ? opt.trace : opt.snapshot;
  doc["weighted_rr"] = perf.weighted_rr;
  doc["p"] = perf.p;
  doc["files"] = recovery_table_json(rows);
  write_file(base.string() + ".json", doc.dump(2) + "\n");
  write_file(base.string() + ".csv", recovery_table_csv(rows));
  out << "recover files=" << rows.size() << " weighted_rr=" << perf.weighted_rr << " P=" << perf.p
      << " -> " << base.string() << ".csv\n";
  return 0;
}

int cmd_train(const Options& opt, std::ostream& out) {
  const AppConfig c = resolve(opt);
  const TrainReport report = train(c.to_train());
  const auto seed = c.workload.rng_seed;
  const auto base = output_base(opt.out, "train", seed, {".json", ".csv"});
  auto doc = envelope("train", seed, c);
  doc["report"] = report.to_json();
  write_file(base.string() + ".json", doc.dump(2) + "\n");
  write_file(base.string() + ".csv", report.trajectory_csv());
  const double gain = report.first_min_p == 0.0 ? 0.0 : report.final_greedy_p / report.first_min_p;
  out << "train seed=" << seed << " mins=" << report.trajectory.size()
      << " final=" << to_string(report.final_state) << " best=" << to_string(report.best_state)
      << " P " << report.first_min_p << " -> " << report.final_greedy_p << " (x" << gain << ")";
  if (report.baseline_p) out << " first-fit=" << *report.baseline_p;
  out << " -> " << base.string() << ".json\n";
  return 0;
}

int cmd_compare(const Options& opt, std::ostream& out) {
  const AppConfig c = resolve(opt);
  const auto rows = run_compare(c.geometry, c.linking, c.hyperparams, c.compare);
  const auto seed = c.compare.seeds.front();
  const auto base = output_base(opt.out, "compare", seed, {".json", ".csv"});
  auto doc = envelope("compare", seed, c);
  nlohmann::json jrows = nlohmann::json::array();
  for (const auto& r : rows) {
    jrows.push_back({{"policy", to_string(AllocationPolicy{r.cell.policy, 0})},
                     {"secondary_fraction", r.cell.secondary_fraction},
                     {"secondary_blocks", r.secondary_blocks},
                     {"seed", r.cell.seed},
                     {"weighted_rr", r.weighted_rr},
                     {"mean_rr", r.mean_rr},
                     {"rr", r.rr}});
  }
  doc["rows"] = std::move(jrows);
  write_file(base.string() + ".json", doc.dump(2) + "\n");
  write_file(base.string() + ".csv", compare_csv(rows, c.compare.primary_files));

  // Summary: mean weighted RR per policy at each fraction.
  out << "compare cells=" << rows.size();
  for (auto policy : c.compare.policies) {
    out << ' ' << to_string(AllocationPolicy{policy, 0}) << '[';
    bool first = true;
    for (double f : c.compare.secondary_fractions) {
      double sum = 0.0;
      int n = 0;
      for (const auto& r : rows) {
        if (r.cell.policy == policy && r.cell.secondary_fraction == f) {
          sum += r.weighted_rr;
          ++n;
        }
      }
      out << (first ? "" : " ") << f << ':' << (n ? sum / n : 0.0);
      first = false;
    }
    out << ']';
  }
  out << " -> " << base.string() << ".csv\n";
  return 0;
}

void add_common(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config, "INI config file");
  sub->add_option("--seed", opt.seed, "seed override");
  sub->add_option("--out", opt.out, "output directory")->capture_default_str();
  sub->add_option("--policy", opt.policy, "allocation policy: apex|first-fit|random");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Recoverability-aware block allocation simulator", "apex"};
  app.require_subcommand(1);
  Options opt;

  auto* simulate = app.add_subcommand("simulate", "run a seeded workload and write report, trace and snapshot");
  add_common(simulate, opt);
  auto* replay = app.add_subcommand("replay", "re-execute a recorded trace");
  add_common(replay, opt);
  replay->add_option("--trace", opt.trace, "JSON-lines trace")->required();
  auto* recover = app.add_subcommand("recover", "recovery table for a snapshot or a replayed trace");
  add_common(recover, opt);
  recover->add_option("--trace", opt.trace, "JSON-lines trace to replay first");
  recover->add_option("--snapshot", opt.snapshot, "file system snapshot JSON");
  auto* train_cmd = app.add_subcommand("train", "Q-learning over the coefficient lattice");
  add_common(train_cmd, opt);
  auto* compare = app.add_subcommand("compare", "case-study sweep over policies, secondary sizes and seeds");
  add_common(compare, opt);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
        out << sub->help();
      }
      return 0;
    }
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt, out);
    if (replay->parsed()) return cmd_replay(opt, out);
    if (recover->parsed()) return cmd_recover(opt, out);
    if (train_cmd->parsed()) return cmd_train(opt, out);
    if (compare->parsed()) return cmd_compare(opt, out);
  } catch (const InvariantViolation& e) {
    err << "invariant violation: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

}  // namespace apex::cli
