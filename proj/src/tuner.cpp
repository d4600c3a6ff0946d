#include "apex/tuner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace apex {

std::size_t QAction::index() const {
  return 2 * static_cast<std::size_t>(coefficient) + (direction < 0 ? 1 : 0);
}

QAction QAction::from_index(std::size_t index) {
  if (index >= kActionCount) throw InvalidArgument("action index out of range");
  return {static_cast<Coefficient>(index / 2), index % 2 == 0 ? +1 : -1};
}

Hyperparams apply_action(const Hyperparams& state, QAction action) {
  Hyperparams next = state;
  int* slot = nullptr;
  switch (action.coefficient) {
    case Coefficient::Lambda:
      slot = &next.lambda;
      break;
    case Coefficient::Sigma:
      slot = &next.sigma;
      break;
    case Coefficient::Rho:
      slot = &next.rho;
      break;
    case Coefficient::Mu:
      slot = &next.mu;
      break;
  }
  const int moved = *slot + action.direction;
  if (moved >= kCoefficientMin && moved <= kCoefficientMax) *slot = moved;
  return next;
}

std::size_t state_index(const Hyperparams& s) {
  if (!in_training_lattice(s)) throw InvalidArgument("state " + to_string(s) + " outside [1,10]^4");
  const auto d = [](int v) { return static_cast<std::size_t>(v - kCoefficientMin); };
  return ((d(s.lambda) * kLatticeSide + d(s.sigma)) * kLatticeSide + d(s.rho)) * kLatticeSide + d(s.mu);
}

Hyperparams state_from_index(std::size_t index) {
  if (index >= kStateCount) throw InvalidArgument("state index out of range");
  Hyperparams s;
  s.mu = static_cast<int>(index % kLatticeSide) + kCoefficientMin;
  index /= kLatticeSide;
  s.rho = static_cast<int>(index % kLatticeSide) + kCoefficientMin;
  index /= kLatticeSide;
  s.sigma = static_cast<int>(index % kLatticeSide) + kCoefficientMin;
  index /= kLatticeSide;
  s.lambda = static_cast<int>(index) + kCoefficientMin;
  return s;
}

QTable::QTable() : values_(kStateCount * kActionCount, 0.0) {}

double QTable::value(const Hyperparams& s, std::size_t action) const {
  return values_.at(state_index(s) * kActionCount + action);
}

void QTable::set(const Hyperparams& s, std::size_t action, double v) {
  values_.at(state_index(s) * kActionCount + action) = v;
}

std::array<double, kActionCount> QTable::row(const Hyperparams& s) const {
  std::array<double, kActionCount> out{};
  const auto base = state_index(s) * kActionCount;
  std::copy_n(values_.begin() + static_cast<std::ptrdiff_t>(base), kActionCount, out.begin());
  return out;
}

double QTable::max_value(const Hyperparams& s) const {
  const auto r = row(s);
  return *std::max_element(r.begin(), r.end());
}

std::size_t QTable::greedy_action(const Hyperparams& s) const {
  const auto r = row(s);
  return static_cast<std::size_t>(std::max_element(r.begin(), r.end()) - r.begin());
}

double TrainSchedule::effective_tau() const {
  if (tau) return *tau;
  return static_cast<double>(min_budget) / std::log(1.0 / epsilon_floor);
}

void TrainSchedule::validate() const {
  if (oin_per_min == 0) throw InvalidArgument("oin_per_min must be positive");
  if (!(epsilon_floor > 0.0 && epsilon_floor < 1.0)) {
    throw InvalidArgument("epsilon_floor must lie in (0,1)");
  }
  if (tau && !(*tau > 0.0)) throw InvalidArgument("tau must be positive");
}

double epsilon(const TrainSchedule& schedule, std::uint64_t min_count) {
  if (min_count == 0) return 1.0;
  return std::exp(-static_cast<double>(min_count) / schedule.effective_tau());
}

std::size_t select_action(const QTable& table, const Hyperparams& state, double eps,
                          std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (unit(rng) < eps) {
    std::uniform_int_distribution<std::size_t> any(0, kActionCount - 1);
    return any(rng);
  }
  return table.greedy_action(state);
}

void q_update(QTable& table, const Hyperparams& s, std::size_t action, double reward,
              const Hyperparams& s_next, double learning_rate, double discount) {
  if (!std::isfinite(reward)) throw InvalidArgument("reward must be finite");
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw InvalidArgument("learning rate must lie in (0,1]");
  }
  if (!(discount >= 0.0 && discount < 1.0)) throw InvalidArgument("discount must lie in [0,1)");
  const double q = table.value(s, action);
  const double target = reward + discount * table.max_value(s_next);
  table.set(s, action, q + learning_rate * (target - q));
}

std::string_view to_string(LearnerMode mode) {
  return mode == LearnerMode::QLearning ? "q-learning" : "hill-climb";
}

LearnerMode parse_learner_mode(std::string_view text) {
  if (text == "q-learning") return LearnerMode::QLearning;
  if (text == "hill-climb") return LearnerMode::HillClimb;
  throw InvalidArgument("unknown learner mode '" + std::string(text) + "'");
}

void TrainConfig::validate() const {
  geometry.validate();
  workload.validate();
  weights.validate();
  schedule.validate();
  if (!in_training_lattice(initial)) {
    throw InvalidArgument("initial coefficients " + to_string(initial) + " outside [1,10]");
  }
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw InvalidArgument("learning rate must lie in (0,1]");
  }
  if (!(discount >= 0.0 && discount < 1.0)) throw InvalidArgument("discount must lie in [0,1)");
}

namespace {

// Runs one MIN worth of operations; P is sampled after every operation and
// averaged.
double run_min(Simulation& sim, FileSystem& fs, const TrainConfig& config) {
  double sum = 0.0;
  for (std::uint64_t i = 0; i < config.schedule.oin_per_min; ++i) {
    sim.step();
    sum += performance_breakdown(fs, config.weights, config.scope).p;
  }
  return sum / static_cast<double>(config.schedule.oin_per_min);
}

double mean(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double evaluate_fixed(Simulation& sim, FileSystem& fs, const TrainConfig& config) {
  std::vector<double> ps;
  for (std::uint64_t m = 0; m < config.eval_mins; ++m) ps.push_back(run_min(sim, fs, config));
  return mean(ps);
}

}  // namespace

TrainReport train(const TrainConfig& config) {
  config.validate();
  TrainReport report;
  report.initial = config.initial;
  report.final_state = config.initial;
  report.best_state = config.initial;
  if (config.schedule.min_budget == 0) return report;

  FileSystem fs(config.geometry, config.initial, {config.linking, AllocationPolicy::apex()});
  Simulation sim(config.workload, fs);
  for (std::uint64_t i = 0; i < config.warmup_ops; ++i) sim.step();

  QTable table;
  std::array<double, kActionCount> last_delta{};
  std::mt19937_64 agent_rng(config.agent_seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> any_action(0, kActionCount - 1);

  Hyperparams state = config.initial;
  Hyperparams prev_state = state;
  std::size_t prev_action = 0;
  double prev_p = 0.0;
  std::uint64_t m = 0;
  const double floor_with_slack = config.schedule.epsilon_floor * (1.0 + 1e-12);

  for (; m < config.schedule.min_budget; ++m) {
    const double eps = epsilon(config.schedule, m);
    if (m > 0 && eps <= floor_with_slack) break;
    report.epsilon_schedule.push_back(eps);
    ++report.visited[state];
    fs.disk().set_hyperparams(state);
    const double p = run_min(sim, fs, config);

    TrainStep step;
    step.min = m;
    step.state = state;
    step.p = p;
    step.epsilon = eps;
    if (m > 0) {
      step.reward = p - prev_p;
      if (config.mode == LearnerMode::QLearning) {
        q_update(table, prev_state, prev_action, step.reward, state, config.learning_rate,
                 config.discount);
      } else {
        last_delta[prev_action] = step.reward;
      }
    }

    std::size_t action = 0;
    if (unit(agent_rng) < eps) {
      action = any_action(agent_rng);
      step.explored = true;
    } else if (config.mode == LearnerMode::QLearning) {
      action = table.greedy_action(state);
    } else {
      action = static_cast<std::size_t>(std::max_element(last_delta.begin(), last_delta.end()) -
                                        last_delta.begin());
    }
    step.action = action;
    report.trajectory.push_back(step);

    prev_state = state;
    prev_action = action;
    prev_p = p;
    state = apply_action(state, QAction::from_index(action));
  }
  report.epsilon_schedule.push_back(epsilon(config.schedule, m));
  report.final_state = state;
  report.first_min_p = report.trajectory.front().p;

  double best = -std::numeric_limits<double>::infinity();
  for (const auto& [s, count] : report.visited) {
    const double v = table.max_value(s);
    if (v > best) {
      best = v;
      report.best_state = s;
    }
  }

  fs.disk().set_hyperparams(state);
  report.final_greedy_p = evaluate_fixed(sim, fs, config);
  report.total_ops = fs.disk().clock();

  if (config.run_baseline) {
    FileSystem base(config.geometry, config.initial, {config.linking, AllocationPolicy::first_fit()});
    Simulation base_sim(config.workload, base);
    const std::uint64_t lead = config.warmup_ops + m * config.schedule.oin_per_min;
    for (std::uint64_t i = 0; i < lead; ++i) base_sim.step();
    report.baseline_p = evaluate_fixed(base_sim, base, config);
  }
  return report;
}

namespace {

nlohmann::json tuple_json(const Hyperparams& hp) {
  return nlohmann::json::array({hp.lambda, hp.sigma, hp.rho, hp.mu});
}

}  // namespace

nlohmann::json TrainReport::to_json() const {
  using nlohmann::json;
  json traj = json::array();
  for (const auto& s : trajectory) {
    traj.push_back({{"min", s.min},
                    {"state", tuple_json(s.state)},
                    {"p", s.p},
                    {"epsilon", s.epsilon},
                    {"reward", s.reward},
                    {"action", s.action},
                    {"explored", s.explored}});
  }
  json hist = json::array();
  for (const auto& [s, count] : visited) hist.push_back({{"state", tuple_json(s)}, {"count", count}});
  json out = {{"initial", tuple_json(initial)},
              {"final_state", tuple_json(final_state)},
              {"best_state", tuple_json(best_state)},
              {"first_min_p", first_min_p},
              {"final_greedy_p", final_greedy_p},
              {"baseline_first_fit_p", baseline_p ? json(*baseline_p) : json(nullptr)},
              {"mins_run", trajectory.size()},
              {"total_ops", total_ops},
              {"epsilon_schedule", epsilon_schedule},
              {"trajectory", std::move(traj)},
              {"visited", std::move(hist)}};
  return out;
}

std::string TrainReport::trajectory_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "min,p,epsilon,lambda,sigma,rho,mu,action,reward\n";
  for (const auto& s : trajectory) {
    out << s.min << ',' << s.p << ',' << s.epsilon << ',' << s.state.lambda << ','
        << s.state.sigma << ',' << s.state.rho << ',' << s.state.mu << ',' << s.action << ','
        << s.reward << '\n';
  }
  return out.str();
}

}  // namespace apex
