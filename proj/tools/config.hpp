#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "apex/tuner.hpp"
#include "apex/vfs.hpp"
#include "apex/workload.hpp"
#include "compare.hpp"

namespace apex::cli {

// Everything a command can read from an INI config. Missing keys keep these
// defaults; unknown sections or keys are rejected.
struct AppConfig {
  DiskGeometry geometry;
  LinkingMode linking = LinkingMode::Literal;
  Hyperparams hyperparams;
  AllocationPolicy policy;
  WorkloadConfig workload;
  PerfWeights weights;
  TrainConfig train;  // geometry, linking, workload and weights are copied in by to_train()
  CompareConfig compare;

  void validate() const;
  TrainConfig to_train() const;
  // Canonical form used for hashing and for echoing into reports.
  nlohmann::json to_json() const;
  std::string hash() const;
};

AppConfig parse_config(const std::string& text, const std::string& origin = "<string>");
AppConfig load_config(const std::filesystem::path& path);

AllocationPolicy::Kind parse_policy(std::string_view text);

}  // namespace apex::cli
