#include "config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "apex/digest.hpp"

namespace apex::cli {

namespace pt = boost::property_tree;

AllocationPolicy::Kind parse_policy(std::string_view text) {
  if (text == "apex") return AllocationPolicy::Kind::Apex;
  if (text == "first-fit") return AllocationPolicy::Kind::FirstFit;
  if (text == "random") return AllocationPolicy::Kind::Random;
  throw InvalidArgument("unknown policy '" + std::string(text) + "' (apex|first-fit|random)");
}

namespace {

const std::map<std::string, std::set<std::string>> kSchema = {
    {"disk", {"rows", "cols", "block_size", "neighborhood", "linking"}},
    {"hyperparams", {"lambda", "sigma", "rho", "mu"}},
    {"policy", {"kind", "seed"}},
    {"workload",
     {"seed", "max_file_blocks", "linked_file_percent", "linked_jitter", "min_utilization",
      "mix_read_write", "mix_create", "mix_delete", "total_ops"}},
    {"objective", {"alpha", "beta", "aat_mode"}},
    {"train",
     {"initial", "oin_per_min", "min_budget", "epsilon_floor", "tau", "learning_rate", "discount",
      "mode", "agent_seed", "warmup_ops", "eval_mins", "baseline", "scope"}},
    {"compare",
     {"primary_files", "primary_fraction", "secondary_fractions", "seeds", "policies",
      "access_ops", "secondary_max_blocks"}},
};

std::string trimmed(std::string s) {
  boost::algorithm::trim(s);
  return s;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  boost::algorithm::split(parts, text, boost::algorithm::is_any_of(","));
  for (auto& p : parts) boost::algorithm::trim(p);
  std::erase_if(parts, [](const std::string& p) { return p.empty(); });
  return parts;
}

template <typename T>
T parse_number(const std::string& text, const std::string& key) {
  T value{};
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) {
    throw InvalidArgument("bad value '" + text + "' for " + key);
  }
  return value;
}

bool parse_bool(const std::string& text, const std::string& key) {
  const auto v = boost::algorithm::to_lower_copy(text);
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw InvalidArgument("bad boolean '" + text + "' for " + key);
}

// Wraps a parsed tree with typed, key-qualified lookups.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {}

  template <typename T>
  void number(const std::string& key, T& out) const {
    if (auto v = raw(key)) out = parse_number<T>(*v, key);
  }
  void text(const std::string& key, std::string& out) const {
    if (auto v = raw(key)) out = *v;
  }
  template <typename F>
  void with(const std::string& key, F&& f) const {
    if (auto v = raw(key)) f(*v);
  }

 private:
  std::optional<std::string> raw(const std::string& key) const {
    auto v = tree_.get_optional<std::string>(pt::ptree::path_type(key, '.'));
    if (!v) return std::nullopt;
    return trimmed(*v);
  }
  const pt::ptree& tree_;
};

Hyperparams parse_tuple(const std::string& text, const std::string& key) {
  const auto parts = split_list(text);
  if (parts.size() != 4) throw InvalidArgument(key + " needs four comma-separated integers");
  return {parse_number<int>(parts[0], key), parse_number<int>(parts[1], key),
          parse_number<int>(parts[2], key), parse_number<int>(parts[3], key)};
}

std::vector<std::uint64_t> parse_seeds(const std::string& text, const std::string& key) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split_list(text)) {
    const auto dash = part.find('-');
    if (dash == std::string::npos) {
      out.push_back(parse_number<std::uint64_t>(part, key));
      continue;
    }
    const auto lo = parse_number<std::uint64_t>(trimmed(part.substr(0, dash)), key);
    const auto hi = parse_number<std::uint64_t>(trimmed(part.substr(dash + 1)), key);
    if (hi < lo) throw InvalidArgument("empty seed range '" + part + "' for " + key);
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
  }
  return out;
}

void check_coefficients(const Hyperparams& hp, const std::string& what) {
  if (!in_training_lattice(hp)) {
    throw InvalidArgument(what + " " + to_string(hp) + " has a coefficient outside [" +
                          std::to_string(kCoefficientMin) + "," +
                          std::to_string(kCoefficientMax) + "]");
  }
}

nlohmann::json tuple_json(const Hyperparams& hp) {
  return nlohmann::json::array({hp.lambda, hp.sigma, hp.rho, hp.mu});
}

}  // namespace

void AppConfig::validate() const {
  geometry.validate();
  check_coefficients(hyperparams, "hyperparams");
  check_coefficients(train.initial, "train.initial");
  workload.validate();
  weights.validate();
  to_train().validate();
  compare.validate();
}

TrainConfig AppConfig::to_train() const {
  TrainConfig out = train;
  out.geometry = geometry;
  out.linking = linking;
  out.workload = workload;
  out.weights = weights;
  return out;
}

nlohmann::json AppConfig::to_json() const {
  using nlohmann::json;
  json policies = json::array();
  for (auto k : compare.policies) policies.push_back(to_string(AllocationPolicy{k, 0}));
  return {
      {"disk",
       {{"rows", geometry.rows},
        {"cols", geometry.cols},
        {"block_size", geometry.block_size_bytes},
        {"neighborhood", apex::to_string(geometry.neighborhood)},
        {"linking", apex::to_string(linking)}}},
      {"hyperparams", tuple_json(hyperparams)},
      {"policy", {{"kind", apex::to_string(policy)}, {"seed", policy.seed}}},
      {"workload",
       {{"seed", workload.rng_seed},
        {"max_file_blocks", workload.max_file_blocks},
        {"linked_file_percent", workload.linked_file_percent},
        {"linked_jitter", workload.linked_jitter},
        {"min_utilization", workload.min_utilization},
        {"mix", {workload.op_mix.read_write, workload.op_mix.create, workload.op_mix.remove}},
        {"total_ops", workload.total_ops}}},
      {"objective",
       {{"alpha", weights.alpha}, {"beta", weights.beta}, {"aat_mode", apex::to_string(weights.aat_mode)}}},
      {"train",
       {{"initial", tuple_json(train.initial)},
        {"oin_per_min", train.schedule.oin_per_min},
        {"min_budget", train.schedule.min_budget},
        {"epsilon_floor", train.schedule.epsilon_floor},
        {"tau", train.schedule.effective_tau()},
        {"learning_rate", train.learning_rate},
        {"discount", train.discount},
        {"mode", apex::to_string(train.mode)},
        {"agent_seed", train.agent_seed},
        {"warmup_ops", train.warmup_ops},
        {"eval_mins", train.eval_mins},
        {"baseline", train.run_baseline},
        {"scope", apex::to_string(train.scope)}}},
      {"compare",
       {{"primary_files", compare.primary_files},
        {"primary_fraction", compare.primary_fraction},
        {"secondary_fractions", compare.secondary_fractions},
        {"seeds", compare.seeds},
        {"policies", policies},
        {"access_ops", compare.access_ops},
        {"secondary_max_blocks", compare.secondary_max_blocks}}},
  };
}

std::string AppConfig::hash() const { return hex_digest(to_json().dump()); }

AppConfig parse_config(const std::string& text, const std::string& origin) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw InvalidArgument(origin + ": line " + std::to_string(e.line()) + ": " + e.message());
  }

  for (const auto& [section, body] : tree) {
    auto it = kSchema.find(section);
    if (it == kSchema.end()) throw InvalidArgument(origin + ": unknown section [" + section + "]");
    if (!body.data().empty()) throw InvalidArgument(origin + ": key '" + section + "' outside a section");
    for (const auto& [key, value] : body) {
      if (!it->second.contains(key)) {
        throw InvalidArgument(origin + ": unknown key '" + key + "' in [" + section + "]");
      }
    }
  }

  AppConfig c;
  const Reader r(tree);
  try {
    r.number("disk.rows", c.geometry.rows);
    r.number("disk.cols", c.geometry.cols);
    r.number("disk.block_size", c.geometry.block_size_bytes);
    r.with("disk.neighborhood", [&](const std::string& v) { c.geometry.neighborhood = parse_neighborhood(v); });
    r.with("disk.linking", [&](const std::string& v) { c.linking = parse_linking_mode(v); });

    r.number("hyperparams.lambda", c.hyperparams.lambda);
    r.number("hyperparams.sigma", c.hyperparams.sigma);
    r.number("hyperparams.rho", c.hyperparams.rho);
    r.number("hyperparams.mu", c.hyperparams.mu);

    r.with("policy.kind", [&](const std::string& v) { c.policy.kind = parse_policy(v); });
    r.number("policy.seed", c.policy.seed);

    r.number("workload.seed", c.workload.rng_seed);
    r.number("workload.max_file_blocks", c.workload.max_file_blocks);
    r.number("workload.linked_file_percent", c.workload.linked_file_percent);
    r.number("workload.linked_jitter", c.workload.linked_jitter);
    r.number("workload.min_utilization", c.workload.min_utilization);
    r.number("workload.mix_read_write", c.workload.op_mix.read_write);
    r.number("workload.mix_create", c.workload.op_mix.create);
    r.number("workload.mix_delete", c.workload.op_mix.remove);
    r.number("workload.total_ops", c.workload.total_ops);

    r.number("objective.alpha", c.weights.alpha);
    r.number("objective.beta", c.weights.beta);
    r.with("objective.aat_mode", [&](const std::string& v) { c.weights.aat_mode = parse_aat_mode(v); });

    r.with("train.initial", [&](const std::string& v) { c.train.initial = parse_tuple(v, "train.initial"); });
    r.number("train.oin_per_min", c.train.schedule.oin_per_min);
    r.number("train.min_budget", c.train.schedule.min_budget);
    r.number("train.epsilon_floor", c.train.schedule.epsilon_floor);
    r.with("train.tau", [&](const std::string& v) { c.train.schedule.tau = parse_number<double>(v, "train.tau"); });
    r.number("train.learning_rate", c.train.learning_rate);
    r.number("train.discount", c.train.discount);
    r.with("train.mode", [&](const std::string& v) { c.train.mode = parse_learner_mode(v); });
    r.number("train.agent_seed", c.train.agent_seed);
    r.number("train.warmup_ops", c.train.warmup_ops);
    r.number("train.eval_mins", c.train.eval_mins);
    r.with("train.baseline", [&](const std::string& v) { c.train.run_baseline = parse_bool(v, "train.baseline"); });
    r.with("train.scope", [&](const std::string& v) { c.train.scope = parse_deleted_scope(v); });

    r.number("compare.primary_files", c.compare.primary_files);
    r.number("compare.primary_fraction", c.compare.primary_fraction);
    r.with("compare.secondary_fractions", [&](const std::string& v) {
      c.compare.secondary_fractions.clear();
      for (const auto& p : split_list(v)) {
        c.compare.secondary_fractions.push_back(parse_number<double>(p, "compare.secondary_fractions"));
      }
    });
    r.with("compare.seeds", [&](const std::string& v) { c.compare.seeds = parse_seeds(v, "compare.seeds"); });
    r.with("compare.policies", [&](const std::string& v) {
      c.compare.policies.clear();
      for (const auto& p : split_list(v)) c.compare.policies.push_back(parse_policy(p));
    });
    r.number("compare.access_ops", c.compare.access_ops);
    r.number("compare.secondary_max_blocks", c.compare.secondary_max_blocks);

    c.validate();
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(origin + ": " + e.what());
  }
  return c;
}

AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path.string());
}

}  // namespace apex::cli
