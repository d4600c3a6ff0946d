#include <doctest.h>

#include "apex/disk.hpp"
#include "apex/priority.hpp"

using namespace apex;

namespace {
DiskGeometry grid(std::uint32_t rows, std::uint32_t cols, Neighborhood n = {}) {
  DiskGeometry g;
  g.rows = rows;
  g.cols = cols;
  g.neighborhood = n;
  return g;
}
}  // namespace

TEST_CASE("new disk: 16x16 with (4,7,1,9) has 256 unused blocks of PF 9") {
  Disk d(grid(16, 16), {4, 7, 1, 9});
  CHECK(d.block_count() == 256);
  CHECK(d.unused().size() == 256);
  CHECK(d.used().empty());
  CHECK(d.clock() == 0);
  for (const auto& b : d.blocks()) {
    CHECK(b.factors == BlockFactors{0, 0, 0.0, 1});
    CHECK(d.priority(b.index) == 9.0);
    CHECK(d.unused().key(b.index) == 9.0);
  }
  d.check_invariants();
}

TEST_CASE("new disk: 1x1 has one unused block") {
  Disk d(grid(1, 1), {1, 1, 1, 1});
  CHECK(d.unused().size() == 1);
}

TEST_CASE("new disk: no neighborhood keeps PF 9 and sf 0 after passes") {
  Disk d(grid(16, 16, {NeighborhoodKind::None, 0}), {4, 7, 1, 9});
  CHECK_FALSE(d.spatial_enabled());
  update_spatial_factors(d);
  for (const auto& b : d.blocks()) {
    CHECK(b.factors.sf == 0.0);
    CHECK(d.priority(b.index) == 9.0);
  }
}

TEST_CASE("zero-sized geometry is rejected") {
  CHECK_THROWS_AS(Disk(grid(0, 4), {}), InvalidArgument);
  CHECK_THROWS_AS(Disk(grid(4, 0), {}), InvalidArgument);
  DiskGeometry g = grid(2, 2);
  g.block_size_bytes = 0;
  CHECK_THROWS_AS(Disk(g, {}), InvalidArgument);
}

TEST_CASE("transition rules") {
  Disk d(grid(2, 2), {4, 7, 1, 9});
  SUBCASE("unused (hf=5, uf=0) to used gives hf=1 uf=1 sf=0") {
    d.set_factors(0, {5, 0, 2.5, 1});
    const auto f = d.transition(0, Direction::ToUsed);
    CHECK(f.hf == 1);
    CHECK(f.uf == 1);
    CHECK(f.sf == 0.0);
    CHECK(d.used().contains(0));
    CHECK_FALSE(d.unused().contains(0));
  }
  SUBCASE("used (hf=1, uf=7) to unused gives hf=0 uf=7") {
    d.transition(1, Direction::ToUsed);
    d.set_factors(1, {1, 7, 0.0, 1});
    const auto f = d.transition(1, Direction::ToUnused);
    CHECK(f.hf == 0);
    CHECK(f.uf == 7);
    CHECK(d.unused().contains(1));
    CHECK(d.unused().key(1) == doctest::Approx(-40.0));
  }
  SUBCASE("transition to the current state is rejected") {
    d.transition(2, Direction::ToUsed);
    CHECK_THROWS_AS(d.transition(2, Direction::ToUsed), InvalidArgument);
    CHECK_THROWS_AS(d.transition(3, Direction::ToUnused), InvalidArgument);
  }
  // A bare disk has no file layer; give used blocks a parent before checking.
  for (auto a : d.used()) d.set_mrpf(a, MrpfRecord{1, std::make_shared<const std::vector<BlockAddress>>(1, a), 1});
  d.check_invariants();
}

TEST_CASE("out-of-range addresses are rejected") {
  Disk d(grid(2, 2), {});
  CHECK_THROWS_AS(d.block(4), InvalidArgument);
  CHECK_THROWS_AS(d.transition(9, Direction::ToUsed), InvalidArgument);
}

TEST_CASE("payload versions increase on every write") {
  Disk d(grid(1, 2), {});
  d.transition(0, Direction::ToUsed);
  d.reset_payload(0);
  const auto v0 = d.block(0).payload.version;
  const std::byte data[3] = {std::byte{1}, std::byte{2}, std::byte{3}};
  d.write_payload(0, 10, data);
  CHECK(d.block(0).payload.version == v0 + 1);
  CHECK(d.block(0).payload.bytes.size() == 4096);
  CHECK(d.block(0).payload.bytes[11] == std::byte{2});
  d.write_payload(0, 0, {});
  CHECK(d.block(0).payload.version == v0 + 2);
  CHECK_THROWS_AS(d.write_payload(0, 4095, data), InvalidArgument);
}

TEST_CASE("clock only moves forward") {
  Disk d(grid(1, 1), {});
  CHECK(d.advance_clock() == 1);
  d.advance_clock_to(5);
  CHECK(d.clock() == 5);
  CHECK_THROWS_AS(d.advance_clock_to(5), InvalidArgument);
}

TEST_CASE("hyperparameter change refreshes every unused key") {
  Disk d(grid(2, 2), {4, 7, 1, 9});
  d.set_factors(0, {2, 1, 0.0, 0});
  d.set_hyperparams({1, 1, 1, 1});
  CHECK(d.unused().key(0) == 1.0);
  CHECK(d.unused().key(1) == 1.0);
  d.check_invariants();
}

TEST_CASE("disk snapshot round-trip is exact") {
  Disk d(grid(3, 4), {2, 3, 4, 5});
  d.transition(0, Direction::ToUsed);
  d.transition(5, Direction::ToUsed);
  auto sib = std::make_shared<const std::vector<BlockAddress>>(std::vector<BlockAddress>{0, 5});
  d.set_mrpf(0, MrpfRecord{1, sib, 1});
  d.set_mrpf(5, MrpfRecord{1, sib, 1});
  d.reset_payload(0);
  const std::byte data[2] = {std::byte{0xab}, std::byte{0xcd}};
  d.write_payload(0, 7, data);
  d.transition(5, Direction::ToUnused);
  update_spatial_factors(d);
  d.advance_clock_to(17);

  const auto doc = d.to_json();
  Disk back = Disk::from_json(doc);
  CHECK(back.to_json() == doc);
  CHECK(back.clock() == 17);
  CHECK(back.block(0).payload.bytes == d.block(0).payload.bytes);
  CHECK(back.block(5).mrpf->sibling_blocks == back.block(0).mrpf->sibling_blocks);
  back.check_invariants();
}

TEST_CASE("malformed disk snapshots are rejected") {
  Disk d(grid(1, 2), {});
  auto doc = d.to_json();
  doc["version"] = 99;
  CHECK_THROWS_AS(Disk::from_json(doc), InvalidArgument);
  doc = d.to_json();
  doc["blocks"].erase(0);
  CHECK_THROWS_AS(Disk::from_json(doc), InvalidArgument);
}
