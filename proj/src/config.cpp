#include "semibandit/config.hpp"

#include <fstream>
#include <set>

namespace semibandit {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
  }
}

std::size_t get_count(const json& obj, const char* key, std::size_t fallback, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  if (!it->is_number_integer() || it->get<long long>() < 0) {
    throw ConfigError("'" + std::string(key) + "' in " + where + " must be a non-negative integer");
  }
  return it->get<std::size_t>();
}

PolicySpec policy_from_json(const json& p, std::size_t index) {
  const std::string where = "policies[" + std::to_string(index) + "]";
  reject_unknown(p, {"name", "kind", "delta", "gamma_multiplier", "ridge", "gamma_rule", "scale", "mc_samples", "clip",
                     "check_invariants"},
                 where);
  PolicySpec spec;
  spec.kind = get_or<std::string>(p, "kind", "", where);
  if (spec.kind.empty()) throw ConfigError(where + " needs a 'kind'");
  spec.name = get_or<std::string>(p, "name", spec.kind, where);

  spec.gbose.delta = get_or<double>(p, "delta", spec.gbose.delta, where);
  spec.gbose.gamma_multiplier = get_or<double>(p, "gamma_multiplier", spec.gbose.gamma_multiplier, where);
  spec.gbose.check_invariants = get_or<bool>(p, "check_invariants", false, where);
  const std::string rule = get_or<std::string>(p, "gamma_rule", "algorithm", where);
  if (rule == "algorithm") {
    spec.gbose.gamma_rule = GammaRule::kAlgorithm;
  } else if (rule == "lemma") {
    spec.gbose.gamma_rule = GammaRule::kLemma;
  } else {
    throw ConfigError("gamma_rule in " + where + " must be 'algorithm' or 'lemma'");
  }

  spec.ts.scale = get_or<double>(p, "scale", spec.ts.scale, where);
  spec.ts.mc_samples = get_count(p, "mc_samples", spec.ts.mc_samples, where);
  if (auto it = p.find("clip"); it != p.end() && !it->is_null()) {
    if (!it->is_array() || it->size() != 2) throw ConfigError("clip in " + where + " must be [p_min, p_max]");
    spec.ts.clip = {(*it)[0].get<double>(), (*it)[1].get<double>()};
  }
  if (auto it = p.find("ridge"); it != p.end() && !it->is_null()) {
    const double ridge = get_or<double>(p, "ridge", 1.0, where);
    spec.gbose.ridge_override = ridge;
    spec.ts.ridge = ridge;
  }
  return spec;
}

json policy_to_json(const PolicySpec& spec) {
  json p{{"name", spec.name}, {"kind", spec.kind}};
  if (spec.kind == "gbose") {
    p["delta"] = spec.gbose.delta;
    p["gamma_multiplier"] = spec.gbose.gamma_multiplier;
    p["gamma_rule"] = spec.gbose.gamma_rule == GammaRule::kAlgorithm ? "algorithm" : "lemma";
    if (spec.gbose.ridge_override) p["ridge"] = *spec.gbose.ridge_override;
    if (spec.gbose.check_invariants) p["check_invariants"] = true;
  } else {
    p["scale"] = spec.ts.scale;
    p["ridge"] = spec.ts.ridge;
    if (spec.kind == "semits") p["mc_samples"] = spec.ts.mc_samples;
    if (spec.kind == "acts") p["clip"] = {spec.ts.clip.first, spec.ts.clip.second};
  }
  return p;
}

EnvironmentSpec env_from_json(const json& e, std::size_t index) {
  const std::string where = "environments[" + std::to_string(index) + "]";
  reject_unknown(e, {"name", "n_arms", "dim", "confounder", "noise_variance", "mu", "context_mode", "seed"}, where);
  EnvironmentSpec spec;
  spec.name = get_or<std::string>(e, "name", "", where);
  spec.n_arms = get_count(e, "n_arms", spec.n_arms, where);
  spec.dim = get_count(e, "dim", spec.dim, where);
  spec.noise_variance = get_or<double>(e, "noise_variance", spec.noise_variance, where);
  spec.seed = get_or<std::uint64_t>(e, "seed", 0, where);

  const std::string conf = get_or<std::string>(e, "confounder", "I", where);
  if (conf == "I") {
    spec.confounder = ConfounderKind::kNone;
  } else if (conf == "II") {
    spec.confounder = ConfounderKind::kOscillating;
  } else if (conf == "III") {
    spec.confounder = ConfounderKind::kOptimalScaled;
  } else {
    spec.confounder = ConfounderKind::kCustom;
    spec.custom_tag = conf;
  }

  const std::string mode = get_or<std::string>(e, "context_mode", "block", where);
  if (mode == "block") {
    spec.context_mode = ContextMode::kBlock;
  } else if (mode == "sphere") {
    spec.context_mode = ContextMode::kSphere;
  } else {
    throw ConfigError("context_mode in " + where + " must be 'block' or 'sphere'");
  }

  if (auto it = e.find("mu"); it != e.end() && !it->is_null()) {
    if (it->is_string()) {
      if (it->get<std::string>() != "uniform") throw ConfigError("mu in " + where + " must be 'uniform' or a vector");
    } else if (it->is_array()) {
      spec.fixed_mu = it->get<Vector>();
    } else {
      throw ConfigError("mu in " + where + " must be 'uniform' or a vector");
    }
  }
  return spec;
}

json env_to_json(const EnvironmentSpec& spec) {
  json e{{"n_arms", spec.n_arms},
         {"dim", spec.dim},
         {"confounder", spec.confounder_label()},
         {"noise_variance", spec.noise_variance},
         {"context_mode", spec.context_mode == ContextMode::kBlock ? "block" : "sphere"}};
  if (!spec.name.empty()) e["name"] = spec.name;
  if (spec.fixed_mu) {
    e["mu"] = *spec.fixed_mu;
  } else {
    e["mu"] = "uniform";
  }
  if (spec.seed) e["seed"] = spec.seed;
  return e;
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  reject_unknown(doc, {"horizon", "n_reps", "gamma_grid", "policies", "environments", "master_seed", "output_dir",
                       "parallelism", "record_every", "notes"},
                 "config");
  ExperimentConfig config;
  config.horizon = get_count(doc, "horizon", config.horizon, "config");
  config.n_reps = get_count(doc, "n_reps", config.n_reps, "config");
  config.master_seed = get_or<std::uint64_t>(doc, "master_seed", 0, "config");
  config.output_dir = get_or<std::string>(doc, "output_dir", "", "config");
  config.parallelism = get_count(doc, "parallelism", config.parallelism, "config");
  config.record_every = get_count(doc, "record_every", config.record_every, "config");
  config.notes = get_or<std::vector<std::string>>(doc, "notes", {}, "config");
  config.gamma_grid = get_or<Vector>(doc, "gamma_grid", config.gamma_grid, "config");

  const auto policies = doc.find("policies");
  if (policies == doc.end() || !policies->is_array()) throw ConfigError("config needs a 'policies' list");
  for (std::size_t i = 0; i < policies->size(); ++i) config.policies.push_back(policy_from_json((*policies)[i], i));

  const auto envs = doc.find("environments");
  if (envs == doc.end() || !envs->is_array()) throw ConfigError("config needs an 'environments' list");
  for (std::size_t i = 0; i < envs->size(); ++i) config.environments.push_back(env_from_json((*envs)[i], i));

  config.validate();
  return config;
}

json config_to_json(const ExperimentConfig& config) {
  json doc;
  doc["horizon"] = config.horizon;
  doc["n_reps"] = config.n_reps;
  doc["gamma_grid"] = config.gamma_grid;
  doc["master_seed"] = config.master_seed;
  doc["output_dir"] = config.output_dir;
  doc["parallelism"] = config.parallelism;
  doc["record_every"] = config.record_every;
  doc["notes"] = config.notes;
  doc["policies"] = json::array();
  for (const auto& p : config.policies) doc["policies"].push_back(policy_to_json(p));
  doc["environments"] = json::array();
  for (const auto& e : config.environments) doc["environments"].push_back(env_to_json(e));
  return doc;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(doc);
}

ExperimentConfig paper_config() {
  ExperimentConfig config;
  config.horizon = 20000;
  config.n_reps = 10;
  config.master_seed = 20240607;
  config.record_every = 100;

  PolicySpec gbose{"GBOSE", "gbose", {}, {}};
  gbose.gbose.delta = 0.05;
  PolicySpec ts{"TS", "lints", {}, {}};
  PolicySpec semi{"SemiTS", "semits", {}, {}};
  PolicySpec acts{"ActionTS", "acts", {}, {}};
  config.policies = {gbose, acts, semi, ts};

  const std::pair<std::size_t, std::size_t> setups[] = {{2, 10}, {10, 2}, {10, 10}};
  const ConfounderKind settings[] = {ConfounderKind::kNone, ConfounderKind::kOscillating,
                                     ConfounderKind::kOptimalScaled};
  for (const auto& [n, d] : setups) {
    for (auto kind : settings) {
      EnvironmentSpec env;
      env.n_arms = n;
      env.dim = d;
      env.confounder = kind;
      env.noise_variance = 0.12;
      env.context_mode = d % (n - 1) == 0 ? ContextMode::kBlock : ContextMode::kSphere;
      config.environments.push_back(env);
    }
  }
  config.notes = {
      "(N, d) = (10, 2) and (10, 10) use sphere contexts: block contexts need (N - 1) to divide d.",
      "noise_variance 0.12 is the variance of the Gaussian reward noise.",
      "horizon 20000; the gamma grid multiplies GBOSE's theoretical width and the TS posterior scale.",
  };
  return config;
}

}  // namespace semibandit
