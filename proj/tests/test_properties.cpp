#include <doctest.h>

#include <random>

#include "apex/recovery.hpp"
#include "apex/workload.hpp"

using namespace apex;

namespace {

DiskGeometry grid(std::uint32_t rows, std::uint32_t cols, Neighborhood n = Neighborhood::grid_row()) {
  DiskGeometry g;
  g.rows = rows;
  g.cols = cols;
  g.neighborhood = n;
  return g;
}

WorkloadConfig config(std::uint64_t seed, std::uint64_t ops) {
  WorkloadConfig c;
  c.rng_seed = seed;
  c.total_ops = ops;
  return c;
}

const AllocationPolicy kPolicies[] = {AllocationPolicy::apex(), AllocationPolicy::first_fit(),
                                      AllocationPolicy::random(11)};

}  // namespace

TEST_CASE("property: same seed gives the same final disk") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    FileSystem a(grid(8, 8), {4, 7, 1, 9});
    FileSystem b(grid(8, 8), {4, 7, 1, 9});
    const auto ra = run_simulation(config(seed, 400), a);
    const auto rb = run_simulation(config(seed, 400), b);
    CHECK(ra.snapshot_digest == rb.snapshot_digest);
    CHECK(ra.to_json() == rb.to_json());
  }
}

TEST_CASE("property: utilization never drops below the floor once reached") {
  for (std::uint64_t seed = 1; seed <= 8; ++seed) {
    CAPTURE(seed);
    FileSystem fs(grid(16, 16), {4, 7, 1, 9});
    auto c = config(seed, 1500);
    c.min_utilization = 0.6;
    bool reached = false;
    std::size_t violations = 0;
    run_simulation(c, fs, {}, [&](const WorkloadOp&, const FileSystem& f) {
      const double u = f.disk().utilization();
      if (reached && u < c.min_utilization) ++violations;
      reached = reached || u >= c.min_utilization;
    });
    CHECK(reached);
    CHECK(violations == 0);
  }
}

TEST_CASE("property: replaying a generated trace reproduces the disk") {
  for (const auto& policy : kPolicies) {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      CAPTURE(seed);
      CAPTURE(to_string(policy));
      FileSystem a(grid(8, 8), {2, 3, 4, 5}, {LinkingMode::Literal, policy});
      const auto report = run_simulation(config(seed, 500), a);
      FileSystem b(grid(8, 8), {2, 3, 4, 5}, {LinkingMode::Literal, policy});
      const auto replayed = replay_trace(report.trace, b);
      CHECK(replayed.snapshot_digest == report.snapshot_digest);
      CHECK(a.to_json() == b.to_json());
    }
  }
}

TEST_CASE("property: snapshot round trip mid-run continues identically") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    CAPTURE(seed);
    const auto policy = kPolicies[seed % 3];
    FileSystem fs(grid(8, 8, Neighborhood::contiguous(2)), {3, 3, 3, 3}, {LinkingMode::Inverted, policy});
    const auto full = run_simulation(config(seed, 600), fs);

    FileSystem head(grid(8, 8, Neighborhood::contiguous(2)), {3, 3, 3, 3}, {LinkingMode::Inverted, policy});
    const std::vector<WorkloadOp> first(full.trace.begin(), full.trace.begin() + 300);
    replay_trace(first, head);
    const auto doc = head.to_json();
    FileSystem restored = FileSystem::from_json(doc);
    CHECK(restored.to_json() == doc);
    restored.check_invariants();
    for (auto it = full.trace.begin() + 300; it != full.trace.end(); ++it) apply_op(restored, *it);
    CHECK(snapshot_digest(restored) == full.snapshot_digest);
  }
}

TEST_CASE("property: failed creates leave no trace") {
  std::mt19937_64 rng(5);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    FileSystem fs(grid(8, 8), {4, 7, 1, 9}, {LinkingMode::Literal, kPolicies[seed % 3]});
    run_simulation(config(seed, 200 + rng() % 200), fs);
    const auto before = fs.to_json();
    const std::size_t free_blocks = fs.disk().unused().size();
    // One metadata block plus enough data blocks to overflow by at least one.
    const std::uint64_t too_big = free_blocks * fs.disk().geometry().block_size_bytes + 1 + rng() % 4096;
    CHECK_THROWS_AS(fs.create_file("/overflow.bin", too_big), DiskFull);
    CHECK(fs.to_json() == before);
    if (!fs.live_files().empty()) {
      const auto& existing = fs.file(fs.live_files().front()).path;
      CHECK_THROWS_AS(fs.create_file(existing, 1), AlreadyExists);
      CHECK(fs.to_json() == before);
    }
    CHECK_THROWS_AS(fs.create_file("relative", 1), InvalidArgument);
    CHECK(fs.to_json() == before);
  }
}

TEST_CASE("property: hf rises only through claims of same-lineage siblings") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    CAPTURE(seed);
    FileSystem fs(grid(6, 6), {4, 7, 1, 9});
    std::vector<Block> before(fs.disk().blocks().begin(), fs.disk().blocks().end());
    std::size_t checked = 0;
    run_simulation(config(seed, 800), fs, {}, [&](const WorkloadOp&, const FileSystem& f) {
      const auto after = f.disk().blocks();
      std::vector<BlockAddress> claimed;
      for (std::size_t i = 0; i < after.size(); ++i) {
        if (before[i].state == BlockState::Unused && after[i].state == BlockState::Used) {
          claimed.push_back(static_cast<BlockAddress>(i));
        }
      }
      for (std::size_t i = 0; i < after.size(); ++i) {
        const auto& was = before[i];
        const auto& now = after[i];
        if (now.state == BlockState::Used) {
          if (was.state == BlockState::Unused) CHECK(now.factors.hf == 1);
          continue;
        }
        if (was.state == BlockState::Used) {
          CHECK(now.factors.hf == 0);
          continue;
        }
        std::uint64_t expected = was.factors.hf;
        if (was.mrpf) {
          for (auto c : claimed) {
            const auto& lineage = before[c].mrpf;
            if (lineage && lineage->same_lineage(*was.mrpf)) ++expected;
          }
        }
        CHECK(now.factors.hf == expected);
        ++checked;
      }
      before.assign(after.begin(), after.end());
    });
    CHECK(checked > 0);
  }
}

TEST_CASE("property: recovery ratios stay in range and P respects the weights") {
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    CAPTURE(seed);
    FileSystem fs(grid(8, 8), {4, 7, 1, 9});
    run_simulation(config(seed, 300), fs);
    for (const auto& f : fs.files()) {
      if (f.status == FileStatus::Used) continue;
      const auto r = recover_file(fs.disk(), f);
      CHECK(r.rr >= 0.0);
      CHECK(r.rr <= 1.0);
      if (f.type_class == TypeClass::Linked) CHECK((r.rr == 0.0 || r.rr == 1.0));
      if (!r.metadata_intact) CHECK(r.rr == 0.0);
    }
    const double wrr = weighted_rr(fs);
    CHECK(wrr >= 0.0);
    CHECK(wrr <= 100.0);
    CHECK(performance(fs, {1.0, 0.0, AatMode::SeekCost}) == wrr);
  }
}
