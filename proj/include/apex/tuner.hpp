#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "apex/recovery.hpp"
#include "apex/vfs.hpp"
#include "apex/workload.hpp"

namespace apex {

enum class Coefficient { Lambda, Sigma, Rho, Mu };

// Index layout: 2*coefficient + (direction < 0), i.e. 0 = lambda+1,
// 1 = lambda-1, 2 = sigma+1, ... 7 = mu-1.
struct QAction {
  Coefficient coefficient = Coefficient::Lambda;
  int direction = +1;

  std::size_t index() const;
  static QAction from_index(std::size_t index);
  friend bool operator==(const QAction&, const QAction&) = default;
};

inline constexpr std::size_t kActionCount = 8;
inline constexpr std::size_t kLatticeSide = kCoefficientMax - kCoefficientMin + 1;
inline constexpr std::size_t kStateCount = kLatticeSide * kLatticeSide * kLatticeSide * kLatticeSide;

// Moves one coefficient by one step; leaving the lattice is a self-loop.
Hyperparams apply_action(const Hyperparams& state, QAction action);

std::size_t state_index(const Hyperparams& state);
Hyperparams state_from_index(std::size_t index);

class QTable {
 public:
  QTable();

  double value(const Hyperparams& s, std::size_t action) const;
  void set(const Hyperparams& s, std::size_t action, double v);
  double max_value(const Hyperparams& s) const;
  // Highest value, lowest index on ties.
  std::size_t greedy_action(const Hyperparams& s) const;
  std::array<double, kActionCount> row(const Hyperparams& s) const;

 private:
  std::vector<double> values_;
};

struct TrainSchedule {
  std::uint64_t oin_per_min = 1000;
  std::uint64_t min_budget = 500;
  double epsilon_floor = 3e-5;
  // Defaults to min_budget / ln(1/epsilon_floor): the floor lands on the
  // last MIN of the budget.
  std::optional<double> tau;

  double effective_tau() const;
  void validate() const;
};

// exp(-min_count / tau).
double epsilon(const TrainSchedule& schedule, std::uint64_t min_count);

// With probability eps a uniform action, otherwise the greedy one.
std::size_t select_action(const QTable& table, const Hyperparams& state, double eps,
                          std::mt19937_64& rng);

// Q(s,a) += lr * (reward + discount * max_a' Q(s',a') - Q(s,a)).
void q_update(QTable& table, const Hyperparams& s, std::size_t action, double reward,
              const Hyperparams& s_next, double learning_rate, double discount);

enum class LearnerMode {
  QLearning,
  HillClimb,  // no table: greedy on the last reward seen per action
};

std::string_view to_string(LearnerMode mode);
LearnerMode parse_learner_mode(std::string_view text);

struct TrainConfig {
  DiskGeometry geometry;
  LinkingMode linking = LinkingMode::Literal;
  Hyperparams initial{1, 1, 10, 1};
  WorkloadConfig workload;
  PerfWeights weights{1.0, 0.0, AatMode::SeekCost};
  DeletedScope scope = DeletedScope::Fragments;
  TrainSchedule schedule;
  double learning_rate = 0.1;
  double discount = 0.9;
  LearnerMode mode = LearnerMode::QLearning;
  std::uint64_t agent_seed = 1;
  std::uint64_t warmup_ops = 2000;
  std::uint64_t eval_mins = 10;
  bool run_baseline = true;

  void validate() const;
};

struct TrainStep {
  std::uint64_t min = 0;
  Hyperparams state;  // coefficients in force during this MIN
  double p = 0.0;  // mean of P over the MIN's operations
  double epsilon = 0.0;
  double reward = 0.0;  // P(this MIN) - P(previous MIN); 0 for the first
  std::size_t action = 0;
  bool explored = false;
};

struct TrainReport {
  Hyperparams initial;
  Hyperparams final_state;  // where the agent stands when training stops
  Hyperparams best_state;   // argmax over visited states of max_a Q
  std::vector<TrainStep> trajectory;
  std::vector<double> epsilon_schedule;  // epsilon(0..stop)
  std::map<Hyperparams, std::uint64_t> visited;
  double first_min_p = 0.0;
  double final_greedy_p = 0.0;  // mean P over eval_mins MINs at final_state
  std::optional<double> baseline_p;  // first-fit over the same windows
  std::uint64_t total_ops = 0;

  nlohmann::json to_json() const;
  // Header: min,p,epsilon,lambda,sigma,rho,mu,action,reward
  std::string trajectory_csv() const;
};

TrainReport train(const TrainConfig& config);

}  // namespace apex
