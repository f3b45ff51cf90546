#include "caws/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace caws {

using nlohmann::json;

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "worker_file", "workers",      "dimension",   "cost_min",     "cost_max",
      "capacity_min", "capacity_max", "mu_map",     "sigma",        "holder_L",
      "holder_alpha", "policies",    "epsilon",     "granularity",  "budgets",
      "replications", "seed",        "reward",      "trace_file",   "drift",
      "trace_rounds", "log_steps"};
  return keys;
}

template <class T>
T get_as(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw Error(std::string("config: field '") + key + "' has the wrong type");
  }
}

std::vector<double> parse_budgets(const json& j) {
  if (j.is_number()) return {j.get<double>()};
  if (j.is_array()) return get_as<std::vector<double>>(j, "budgets");
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      if (k != "start" && k != "stop" && k != "step") {
        throw Error("config: unknown key 'budgets." + k + "'");
      }
    }
    if (!j.contains("start") || !j.contains("stop") || !j.contains("step")) {
      throw Error("config: budget range needs start, stop and step");
    }
    return budget_range(get_as<double>(j["start"], "budgets.start"),
                        get_as<double>(j["stop"], "budgets.stop"),
                        get_as<double>(j["step"], "budgets.step"));
  }
  throw Error("config: field 'budgets' has the wrong type");
}

DriftParams parse_drift(const json& j) {
  if (!j.is_object()) throw Error("config: field 'drift' must be an object");
  DriftParams d;
  for (const auto& [k, v] : j.items()) {
    if (k == "decay_rate") {
      d.decay_rate = get_as<double>(v, "drift.decay_rate");
    } else if (k == "step_size") {
      d.step_size = get_as<double>(v, "drift.step_size");
    } else if (k == "start_battery") {
      if (!v.is_null()) d.start_battery = get_as<double>(v, "drift.start_battery");
    } else {
      throw Error("config: unknown key 'drift." + k + "'");
    }
  }
  return d;
}

}  // namespace

std::vector<double> budget_range(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw Error("budget range: need step > 0 and stop >= start");
  std::vector<double> out;
  // Half a step of slack absorbs rounding in (stop - start) / step.
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 0.5)) + 1;
  for (std::size_t k = 0; k < count; ++k) {
    const double b = start + static_cast<double>(k) * step;
    if (b > stop + step * 1e-9) break;
    out.push_back(b);
  }
  return out;
}

void validate_config(const ExperimentConfig& c) {
  if (!c.worker_file) {
    if (c.workers.empty()) throw Error("config: workers grid is empty");
    for (std::size_t n : c.workers) {
      if (n == 0) throw Error("config: worker counts must be positive");
    }
  }
  if (c.budgets.empty()) throw Error("config: budget grid is empty");
  for (double b : c.budgets) {
    if (!(b > 0.0) || !std::isfinite(b)) throw Error("config: budgets must be positive");
  }
  if (c.replications == 0) throw Error("config: replications must be at least 1");
  if (c.policies.empty()) throw Error("config: no policy");
  if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw Error("config: epsilon must be in (0,1)");
  if (c.dimension == 0) throw Error("config: dimension must be positive");
  if (!(c.cost_min > 0.0) || !(c.cost_max >= c.cost_min)) {
    throw Error("config: need 0 < cost_min <= cost_max");
  }
  if (c.capacity_max < c.capacity_min) throw Error("config: need capacity_min <= capacity_max");
  if (!(c.sigma > 0.0)) throw Error("config: sigma must be positive");
  const MuMap map = resolve_mu_map(c);
  if (map.kind() == MuMap::Kind::gaussian_distance_battery && c.dimension != 2 && !c.worker_file) {
    throw Error("config: gaussian-distance-battery needs dimension 2");
  }
  if (c.holder_L && !(*c.holder_L > 0.0)) throw Error("config: holder_L must be positive");
  if (c.holder_alpha && !(*c.holder_alpha > 0.0)) throw Error("config: holder_alpha must be positive");
  if (c.granularity.mode == Granularity::Mode::fixed && c.granularity.cells_per_axis == 0) {
    throw Error("config: granularity must be positive");
  }
  if (c.trace_file && c.drift) throw Error("config: trace_file and drift are exclusive");
  if (c.drift && c.dimension != 2) throw Error("config: drift traces need dimension 2");
  if (c.trace_rounds == 0) throw Error("config: trace_rounds must be positive");
}

ExperimentConfig parse_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error("config: top level must be an object");

  ExperimentConfig c;
  for (const auto& [k, v] : j.items()) {
    if (!known_keys().contains(k)) throw Error("config: unknown key '" + k + "'");
    if (v.is_null()) continue;
    if (k == "worker_file") c.worker_file = get_as<std::string>(v, "worker_file");
    else if (k == "workers") {
      c.workers = v.is_array() ? get_as<std::vector<std::size_t>>(v, "workers")
                               : std::vector<std::size_t>{get_as<std::size_t>(v, "workers")};
    } else if (k == "dimension") c.dimension = get_as<std::size_t>(v, "dimension");
    else if (k == "cost_min") c.cost_min = get_as<double>(v, "cost_min");
    else if (k == "cost_max") c.cost_max = get_as<double>(v, "cost_max");
    else if (k == "capacity_min") c.capacity_min = get_as<Capacity>(v, "capacity_min");
    else if (k == "capacity_max") c.capacity_max = get_as<Capacity>(v, "capacity_max");
    else if (k == "mu_map") c.mu_map = get_as<std::string>(v, "mu_map");
    else if (k == "sigma") c.sigma = get_as<double>(v, "sigma");
    else if (k == "holder_L") c.holder_L = get_as<double>(v, "holder_L");
    else if (k == "holder_alpha") c.holder_alpha = get_as<double>(v, "holder_alpha");
    else if (k == "policies") {
      c.policies.clear();
      if (v.is_string()) {
        c.policies.push_back(parse_policy_kind(v.get<std::string>()));
      } else {
        for (const std::string& p : get_as<std::vector<std::string>>(v, "policies")) {
          c.policies.push_back(parse_policy_kind(p));
        }
      }
    } else if (k == "epsilon") c.epsilon = get_as<double>(v, "epsilon");
    else if (k == "granularity") {
      c.granularity = v.is_number_unsigned()
                          ? Granularity::fixed(v.get<std::size_t>())
                          : parse_granularity(get_as<std::string>(v, "granularity"));
    } else if (k == "budgets") c.budgets = parse_budgets(v);
    else if (k == "replications") c.replications = get_as<std::size_t>(v, "replications");
    else if (k == "seed") c.seed = get_as<std::uint64_t>(v, "seed");
    else if (k == "reward") c.reward = parse_reward_kind(get_as<std::string>(v, "reward"));
    else if (k == "trace_file") c.trace_file = get_as<std::string>(v, "trace_file");
    else if (k == "drift") c.drift = parse_drift(v);
    else if (k == "trace_rounds") c.trace_rounds = get_as<std::size_t>(v, "trace_rounds");
    else if (k == "log_steps") c.log_steps = get_as<bool>(v, "log_steps");
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

std::string dump_config(const ExperimentConfig& c) {
  json j;
  if (c.worker_file) j["worker_file"] = *c.worker_file;
  j["workers"] = c.workers;
  j["dimension"] = c.dimension;
  j["cost_min"] = c.cost_min;
  j["cost_max"] = c.cost_max;
  j["capacity_min"] = c.capacity_min;
  j["capacity_max"] = c.capacity_max;
  j["mu_map"] = c.mu_map;
  j["sigma"] = c.sigma;
  if (c.holder_L) j["holder_L"] = *c.holder_L;
  if (c.holder_alpha) j["holder_alpha"] = *c.holder_alpha;
  json policies = json::array();
  for (PolicyKind p : c.policies) policies.push_back(std::string(to_string(p)));
  j["policies"] = policies;
  j["epsilon"] = c.epsilon;
  j["granularity"] = to_string(c.granularity);
  j["budgets"] = c.budgets;
  j["replications"] = c.replications;
  j["seed"] = c.seed;
  j["reward"] = std::string(to_string(c.reward));
  if (c.trace_file) j["trace_file"] = *c.trace_file;
  if (c.drift) {
    json d{{"decay_rate", c.drift->decay_rate}, {"step_size", c.drift->step_size}};
    if (c.drift->start_battery) d["start_battery"] = *c.drift->start_battery;
    j["drift"] = d;
  }
  j["trace_rounds"] = c.trace_rounds;
  j["log_steps"] = c.log_steps;
  return j.dump();
}

std::uint64_t config_digest(const ExperimentConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : dump_config(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

MuMap resolve_mu_map(const ExperimentConfig& config) {
  const MuMap m = parse_mu_map(config.mu_map);
  if (m.kind() == MuMap::Kind::gaussian_distance_battery) {
    return MuMap::gaussian_distance_battery(config.sigma);
  }
  return m;
}

PolicyConfig policy_config(const ExperimentConfig& config, PolicyKind kind) {
  return PolicyConfig{kind, config.epsilon, config.granularity};
}

}  // namespace caws
