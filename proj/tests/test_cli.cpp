#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "compare.hpp"
#include "config.hpp"

#include "apex/vfs.hpp"

using namespace apex;
using namespace apex::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    static int counter = 0;
    path = fs::temp_directory_path() / ("apex-cli-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "apex");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::vector<fs::path> files_with(const fs::path& dir, const std::string& suffix) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
      out.push_back(e.path());
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("config parsing") {
  const auto c = parse_config(R"(
[disk]
rows = 4
cols = 8
neighborhood = contiguous:2
linking = inverted
[hyperparams]
lambda = 2
[train]
initial = 3, 4, 5, 6
mode = hill-climb
baseline = no
[compare]
seeds = 1-3, 7
policies = apex, random
secondary_fractions = 0.5, 0
)");
  CHECK(c.geometry.rows == 4);
  CHECK(c.geometry.neighborhood.k == 2);
  CHECK(c.linking == LinkingMode::Inverted);
  CHECK(c.hyperparams == Hyperparams{2, 7, 1, 9});
  CHECK(c.train.initial == Hyperparams{3, 4, 5, 6});
  CHECK(c.train.mode == LearnerMode::HillClimb);
  CHECK_FALSE(c.train.run_baseline);
  CHECK(c.compare.seeds == std::vector<std::uint64_t>{1, 2, 3, 7});
  CHECK(c.compare.policies.size() == 2);
  CHECK(c.to_train().geometry.cols == 8);

  CHECK(parse_config("").hash() == AppConfig{}.hash());
  CHECK(parse_config("[hyperparams]\nlambda=5\n").hash() != AppConfig{}.hash());
}

TEST_CASE("config validation errors") {
  CHECK_THROWS_WITH_AS(parse_config("[hyperparams]\nlambda = 11\n"), doctest::Contains("[1,10]"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[hyperparams]\nlambda = 0\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[disk]\nrows = -1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[disk]\nrows = abc\n"), InvalidArgument);
  CHECK_THROWS_WITH_AS(parse_config("[disk]\nspeed = 3\n"), doctest::Contains("unknown key"), InvalidArgument);
  CHECK_THROWS_WITH_AS(parse_config("[gpu]\nx = 1\n"), doctest::Contains("unknown section"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[objective]\nalpha = 0.5\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[workload]\nmix_create = 0.5\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[compare]\nseeds = 5-1\n"), InvalidArgument);
  CHECK_THROWS_AS(parse_config("[policy]\nkind = best-fit\n"), InvalidArgument);
  CHECK_THROWS_AS(load_config("/definitely/not/here.ini"), InvalidArgument);
}

TEST_CASE("bundled configs load") {
  for (auto name : {"default.ini", "surveillance.ini", "train-desk.ini"}) {
    CAPTURE(name);
    CHECK_NOTHROW(load_config(fs::path(APEX_SOURCE_DIR) / "configs" / name));
  }
  CHECK(load_config(fs::path(APEX_SOURCE_DIR) / "configs" / "default.ini").hash() == AppConfig{}.hash());
}

TEST_CASE("cli: bad input exits 2") {
  auto r = run({"train", "--config", "/no/such/config.ini"});
  CHECK(r.code == 2);
  CHECK(r.err.find("/no/such/config.ini") != std::string::npos);

  TempDir dir;
  write(dir.path / "bad.ini", "[hyperparams]\nlambda = 12\n");
  r = run({"train", "--config", (dir.path / "bad.ini").string(), "--out", dir.path.string()});
  CHECK(r.code == 2);
  CHECK(r.err.find("outside") != std::string::npos);

  CHECK(run({}).code == 2);
  CHECK(run({"fly"}).code == 2);
  CHECK(run({"simulate", "--policy", "best"}).code == 2);
  CHECK(run({"replay"}).code == 2);
  CHECK(run({"replay", "--trace", (dir.path / "missing.jsonl").string()}).code == 2);
  CHECK(run({"recover"}).code == 2);
  CHECK(run({"--help"}).code == 0);
}

TEST_CASE("cli: simulate twice gives identical reports and replay matches") {
  TempDir dir;
  const auto out = dir.path.string();
  auto a = run({"simulate", "--seed", "7", "--out", out});
  auto b = run({"simulate", "--seed", "7", "--out", out});
  REQUIRE(a.code == 0);
  REQUIRE(b.code == 0);
  CHECK(a.out.find("simulate seed=7") == 0);
  const auto reports = files_with(dir.path, "Z.json");
  const auto suffixed = files_with(dir.path, "-1.json");
  REQUIRE(reports.size() + suffixed.size() == 2);
  const auto all = files_with(dir.path, ".snapshot.json");
  REQUIRE(all.size() == 2);
  CHECK(slurp(all[0]) == slurp(all[1]));
  std::vector<fs::path> main_reports;
  for (const auto& p : files_with(dir.path, ".json")) {
    const auto n = p.filename().string();
    if (n.find(".snapshot") == std::string::npos) main_reports.push_back(p);
  }
  REQUIRE(main_reports.size() == 2);
  CHECK(slurp(main_reports[0]) == slurp(main_reports[1]));
  const auto doc = nlohmann::json::parse(slurp(main_reports[0]));
  CHECK(doc.at("seed") == 7);
  CHECK(doc.at("config_hash").get<std::string>().size() == 16);

  const auto trace = files_with(dir.path, ".trace.jsonl").front();
  TempDir rdir;
  auto r = run({"replay", "--seed", "7", "--trace", trace.string(), "--out", rdir.path.string()});
  REQUIRE(r.code == 0);
  const auto replayed = files_with(rdir.path, ".snapshot.json");
  REQUIRE(replayed.size() == 1);
  CHECK(slurp(replayed[0]) == slurp(all[0]));
}

TEST_CASE("cli: recover") {
  TempDir dir;
  SUBCASE("no deleted files gives an empty table") {
    FileSystem empty(DiskGeometry{}, {});
    empty.create_file("/a", 10);
    write(dir.path / "snap.json", empty.to_json().dump());
    auto r = run({"recover", "--snapshot", (dir.path / "snap.json").string(), "--out", dir.path.string()});
    REQUIRE(r.code == 0);
    const auto csv = files_with(dir.path, ".csv");
    REQUIRE(csv.size() == 1);
    CHECK(slurp(csv[0]) == "file_id,path,type,status,uf,surviving_blocks,total_blocks,metadata_intact,rr\n");
  }
  SUBCASE("from a trace") {
    write(dir.path / "t.jsonl",
          R"({"tick":1,"op":"create","path":"/a.txt","size_blocks":2,"type":"partial"})"
          "\n"
          R"({"tick":2,"op":"delete","path":"/a.txt"})"
          "\n");
    auto r = run({"recover", "--trace", (dir.path / "t.jsonl").string(), "--out", dir.path.string()});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("weighted_rr=100") != std::string::npos);
  }
  SUBCASE("corrupt snapshot") {
    write(dir.path / "snap.json", "{\"format\":\"apex-fs\"");
    CHECK(run({"recover", "--snapshot", (dir.path / "snap.json").string(), "--out", dir.path.string()}).code == 2);
  }
}

TEST_CASE("cli: train writes JSON and CSV") {
  TempDir dir;
  write(dir.path / "t.ini",
        "[disk]\nrows=8\ncols=8\n[train]\noin_per_min=10\nmin_budget=12\nwarmup_ops=50\neval_mins=1\n");
  auto r = run({"train", "--config", (dir.path / "t.ini").string(), "--seed", "4", "--out", dir.path.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("train seed=4") == 0);
  CHECK(files_with(dir.path, ".json").size() == 1);
  const auto csv = files_with(dir.path, ".csv");
  REQUIRE(csv.size() == 1);
  CHECK(csv[0].filename().string().rfind("train-4-", 0) == 0);
}

TEST_CASE("compare recipe edges") {
  DiskGeometry g;
  CompareConfig c;
  c.seeds = {1, 2};
  c.secondary_fractions = {0.0, 1.0};
  const auto rows = run_compare(g, LinkingMode::Literal, {4, 7, 1, 9}, c);
  REQUIRE(rows.size() == 3 * 2 * 2);
  for (const auto& r : rows) {
    CAPTURE(r.cell.secondary_fraction);
    REQUIRE(r.rr.size() == 5);
    const double expect = r.cell.secondary_fraction == 0.0 ? 1.0 : 0.0;
    for (double v : r.rr) CHECK(v == expect);
    CHECK(r.weighted_rr == expect * 100.0);
    CHECK(r.secondary_blocks == (r.cell.secondary_fraction == 0.0 ? 0u : 256u));
  }
  // Sorted by policy order, fraction, seed.
  CHECK(rows[0].cell.policy == AllocationPolicy::Kind::Apex);
  CHECK(rows[1].cell.seed == 2);
  CHECK(rows[2].cell.secondary_fraction == 1.0);
  const auto csv = compare_csv(rows, 5);
  CHECK(csv.rfind("policy,secondary_fraction,secondary_blocks,seed,weighted_rr,mean_rr,rr_1,rr_2,rr_3,rr_4,rr_5\n", 0) == 0);
}

TEST_CASE("compare: serial cells equal the parallel sweep") {
  DiskGeometry g;
  CompareConfig c;
  c.seeds = {3, 4, 5};
  c.secondary_fractions = {0.4, 0.78};
  const auto rows = run_compare(g, LinkingMode::Literal, {4, 7, 1, 9}, c);
  for (const auto& r : rows) {
    const auto one = run_compare_cell(g, LinkingMode::Literal, {4, 7, 1, 9}, c, r.cell);
    CHECK(one.rr == r.rr);
    CHECK(one.weighted_rr == r.weighted_rr);
  }
}

TEST_CASE("cli: compare writes CSV") {
  TempDir dir;
  write(dir.path / "c.ini", "[compare]\nseeds = 1-2\nsecondary_fractions = 0.4\npolicies = apex, first-fit\n");
  auto r = run({"compare", "--config", (dir.path / "c.ini").string(), "--out", dir.path.string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("compare cells=4") == 0);
  const auto csv = files_with(dir.path, ".csv");
  REQUIRE(csv.size() == 1);
  const auto text = slurp(csv[0]);
  CHECK(std::count(text.begin(), text.end(), '\n') == 5);
}
