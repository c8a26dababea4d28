#include "semibandit/harness.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <tuple>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace semibandit {

namespace {

struct PolicyRegistry {
  std::mutex mu;
  std::map<std::string, PolicyFactory> factories;
};

PolicyRegistry& policy_registry() {
  static PolicyRegistry r;
  return r;
}

std::optional<PolicyFactory> find_factory(const std::string& kind) {
  auto& r = policy_registry();
  std::lock_guard lock(r.mu);
  auto it = r.factories.find(kind);
  if (it == r.factories.end()) return std::nullopt;
  return it->second;
}

}  // namespace

void register_policy_kind(const std::string& kind, PolicyFactory factory) {
  auto& r = policy_registry();
  std::lock_guard lock(r.mu);
  r.factories[kind] = std::move(factory);
}

bool has_policy_kind(const std::string& kind) {
  static const std::set<std::string> builtin{"gbose", "lints", "semits", "acts"};
  return builtin.count(kind) > 0 || find_factory(kind).has_value();
}

std::unique_ptr<Policy> make_policy(const PolicySpec& spec, double gamma_multiplier) {
  if (spec.kind == "gbose") {
    GboseConfig c = spec.gbose;
    c.gamma_multiplier *= gamma_multiplier;
    return std::make_unique<Gbose>(c);
  }
  TsConfig ts = spec.ts;
  ts.scale *= gamma_multiplier;
  if (spec.kind == "lints") return std::make_unique<LinTs>(ts);
  if (spec.kind == "semits") return std::make_unique<SemiparametricTs>(ts);
  if (spec.kind == "acts") return std::make_unique<ActionCenteredTs>(ts);
  if (auto factory = find_factory(spec.kind)) return (*factory)(spec, gamma_multiplier);
  throw ConfigError("unknown policy kind '" + spec.kind + "'");
}

Vector default_gamma_grid() {
  Vector grid(11);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = std::pow(10.0, -2.0 + 0.3 * static_cast<double>(i));
  return grid;
}

void ExperimentConfig::validate() const {
  if (horizon == 0) throw ConfigError("horizon must be at least 1");
  if (n_reps == 0) throw ConfigError("n_reps must be at least 1");
  if (gamma_grid.empty()) throw ConfigError("gamma_grid must be nonempty");
  for (double g : gamma_grid)
    if (!(g > 0.0) || !std::isfinite(g)) throw ConfigError("gamma_grid entries must be positive and finite");
  if (policies.empty()) throw ConfigError("at least one policy is required");
  if (environments.empty()) throw ConfigError("at least one environment is required");
  if (parallelism == 0) throw ConfigError("parallelism must be at least 1");
  if (record_every == 0) throw ConfigError("record_every must be at least 1");

  std::set<std::string> names;
  for (const auto& p : policies) {
    if (p.name.empty()) throw ConfigError("policy name must be nonempty");
    if (!names.insert(p.name).second) throw ConfigError("duplicate policy name '" + p.name + "'");
    if (!has_policy_kind(p.kind)) throw ConfigError("unknown policy kind '" + p.kind + "'");
    if (p.kind == "gbose") p.gbose.validate();
    if (p.kind == "lints" || p.kind == "semits" || p.kind == "acts") p.ts.validate();
  }
  std::set<std::string> labels;
  for (const auto& e : environments) {
    e.validate();
    if (!labels.insert(e.label()).second) throw ConfigError("duplicate environment label '" + e.label() + "'");
  }
}

std::vector<std::size_t> recorded_steps(std::size_t horizon, std::size_t every) {
  std::vector<std::size_t> steps;
  if (horizon == 0) return steps;
  if (every == 0) every = 1;
  steps.push_back(1);
  for (std::size_t t = every; t <= horizon; t += every)
    if (t > 1) steps.push_back(t);
  if (steps.back() != horizon) steps.push_back(horizon);
  return steps;
}

RegretCurve thin_curve(const RegretCurve& curve, std::size_t every) {
  RegretCurve out;
  out.meta = curve.meta;
  if (curve.steps.empty()) return out;
  const std::size_t horizon = curve.steps.back();
  std::size_t cursor = 0;
  for (std::size_t t : recorded_steps(horizon, every)) {
    while (cursor < curve.steps.size() && curve.steps[cursor] < t) ++cursor;
    if (cursor < curve.steps.size() && curve.steps[cursor] == t) {
      out.steps.push_back(t);
      out.values.push_back(curve.values[cursor]);
    }
  }
  return out;
}

RegretCurve run_episode(Policy& policy, const EnvironmentSpec& env_spec, std::size_t horizon, std::uint64_t seed,
                        WarningLog* log) {
  if (horizon == 0) throw ConfigError("horizon must be at least 1");
  Environment env(env_spec, derive_seed(seed, {0}), log);
  Rng policy_rng(derive_seed(seed, {1}));
  policy.reset(env_spec.dim, horizon);

  RegretCurve curve;
  curve.meta.setting = env_spec.label();
  curve.meta.n_arms = env_spec.n_arms;
  curve.meta.dim = env_spec.dim;
  curve.meta.seed = seed;
  curve.steps.reserve(horizon);
  curve.values.reserve(horizon);

  for (std::size_t t = 1; t <= horizon; ++t) {
    const RoundContext round = env.next_round();
    const Decision decision = policy.choose(round, policy_rng);
    if (decision.chosen_arm >= round.n_arms()) throw std::logic_error("policy chose an arm out of range");
    const double reward = env.realize_reward(round, decision.chosen_arm);
    policy.update(Feedback{reward, round, decision});
    curve.steps.push_back(t);
    curve.values.push_back(env.cumulative_regret());
  }
  return curve;
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t env_index, std::size_t rep) {
  return derive_seed(master_seed, {env_index, rep});
}

std::vector<SweepCell> enumerate_cells(const ExperimentConfig& config) {
  std::vector<SweepCell> cells;
  cells.reserve(config.policies.size() * config.environments.size() * config.gamma_grid.size() * config.n_reps);
  for (std::size_t p = 0; p < config.policies.size(); ++p)
    for (std::size_t e = 0; e < config.environments.size(); ++e)
      for (std::size_t g = 0; g < config.gamma_grid.size(); ++g)
        for (std::size_t r = 0; r < config.n_reps; ++r) cells.push_back({p, e, g, r});
  return cells;
}

namespace {

struct CellOutcome {
  std::optional<RegretCurve> curve;
  std::optional<FailureRecord> failure;
};

CurveMeta cell_meta(const ExperimentConfig& config, const SweepCell& cell) {
  const auto& env = config.environments[cell.env_index];
  CurveMeta meta;
  meta.policy = config.policies[cell.policy_index].name;
  meta.setting = env.label();
  meta.n_arms = env.n_arms;
  meta.dim = env.dim;
  meta.gamma_index = cell.gamma_index;
  meta.gamma_mult = config.gamma_grid[cell.gamma_index];
  meta.rep = cell.rep;
  meta.seed = replication_seed(config.master_seed, cell.env_index, cell.rep);
  return meta;
}

CellOutcome run_cell(const ExperimentConfig& config, const SweepCell& cell, WarningLog* log) noexcept {
  CellOutcome out;
  CurveMeta meta;
  try {
    meta = cell_meta(config, cell);
    auto policy = make_policy(config.policies[cell.policy_index], meta.gamma_mult);
    RegretCurve full = run_episode(*policy, config.environments[cell.env_index], config.horizon, meta.seed, log);
    full.meta = meta;
    out.curve = thin_curve(full, config.record_every);
  } catch (const std::exception& e) {
    out.failure = FailureRecord{meta, e.what()};
  } catch (...) {
    out.failure = FailureRecord{meta, "unknown error"};
  }
  return out;
}

SweepResult collect(std::vector<CellOutcome>& outcomes) {
  SweepResult result;
  for (auto& o : outcomes) {
    if (o.curve) result.curves.push_back(std::move(*o.curve));
    if (o.failure) result.failures.push_back(std::move(*o.failure));
  }
  return result;
}

}  // namespace

SweepResult run_sweep_serial(const ExperimentConfig& config, WarningLog* log) {
  config.validate();
  const auto cells = enumerate_cells(config);
  std::vector<CellOutcome> outcomes(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) outcomes[c] = run_cell(config, cells[c], log);
  return collect(outcomes);
}

SweepResult run_sweep(const ExperimentConfig& config, WarningLog* log) {
  config.validate();
  const auto cells = enumerate_cells(config);
  std::vector<CellOutcome> outcomes(cells.size());
  const auto n = static_cast<std::ptrdiff_t>(cells.size());
#ifdef _OPENMP
  const int threads = static_cast<int>(config.parallelism);
#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
#endif
  for (std::ptrdiff_t c = 0; c < n; ++c) {
    const auto idx = static_cast<std::size_t>(c);
    outcomes[idx] = run_cell(config, cells[idx], log);
  }
  return collect(outcomes);
}

double quantile_linear(std::span<const double> sorted, double p) {
  if (sorted.empty()) throw std::invalid_argument("quantile of an empty sample");
  const double rank = p * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(rank));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

AggregateBand aggregate_band(std::span<const RegretCurve> curves) {
  if (curves.empty()) throw std::invalid_argument("aggregate_band: no curves");
  const auto& first = curves.front();
  for (const auto& c : curves) {
    if (c.steps != first.steps) throw std::invalid_argument("aggregate_band: curves record different steps");
  }
  AggregateBand band;
  band.policy = first.meta.policy;
  band.setting = first.meta.setting;
  band.gamma_index = first.meta.gamma_index;
  band.gamma_mult = first.meta.gamma_mult;
  band.steps = first.steps;
  const std::size_t n = first.steps.size();
  band.median.resize(n);
  band.q1.resize(n);
  band.q3.resize(n);
  Vector column(curves.size());
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t r = 0; r < curves.size(); ++r) column[r] = curves[r].values[t];
    std::sort(column.begin(), column.end());
    band.median[t] = quantile_linear(column, 0.5);
    band.q1[t] = quantile_linear(column, 0.25);
    band.q3[t] = quantile_linear(column, 0.75);
  }
  return band;
}

BestGamma select_best_gamma(std::span<const RegretCurve> curves, const std::string& policy,
                            const std::string& setting, std::size_t expected_reps, WarningLog* log) {
  std::map<std::size_t, std::vector<RegretCurve>> by_gamma;
  for (const auto& c : curves)
    if (c.meta.policy == policy && c.meta.setting == setting) by_gamma[c.meta.gamma_index].push_back(c);

  std::optional<BestGamma> best;
  for (auto& [gi, group] : by_gamma) {
    if (group.size() < expected_reps) {
      if (log) {
        log->warn_once("missing-reps:" + policy + ":" + setting + ":" + std::to_string(gi),
                       "gamma index " + std::to_string(gi) + " of " + policy + "/" + setting + " has " +
                           std::to_string(group.size()) + " of " + std::to_string(expected_reps) +
                           " replications; excluded from best-gamma selection");
      }
      continue;
    }
    AggregateBand band = aggregate_band(group);
    const double final_median = band.median.back();
    if (!best || final_median < best->median_final) {
      best = BestGamma{gi, band.gamma_mult, final_median, std::move(band)};
    }
  }
  if (!best) throw std::runtime_error("no complete gamma value for " + policy + "/" + setting);
  return *best;
}

std::vector<AggregateBand> aggregate_sweep(const SweepResult& result, const ExperimentConfig& config,
                                           WarningLog* log) {
  std::map<std::tuple<std::string, std::string, std::size_t>, std::vector<RegretCurve>> groups;
  for (const auto& c : result.curves) groups[{c.meta.policy, c.meta.setting, c.meta.gamma_index}].push_back(c);

  std::vector<AggregateBand> bands;
  for (const auto& p : config.policies) {
    for (const auto& e : config.environments) {
      for (std::size_t g = 0; g < config.gamma_grid.size(); ++g) {
        auto it = groups.find({p.name, e.label(), g});
        const std::size_t have = it == groups.end() ? 0 : it->second.size();
        if (have < config.n_reps) {
          if (log) {
            log->warn_once("missing-reps:" + p.name + ":" + e.label() + ":" + std::to_string(g),
                           "gamma index " + std::to_string(g) + " of " + p.name + "/" + e.label() + " has " +
                               std::to_string(have) + " of " + std::to_string(config.n_reps) +
                               " replications; excluded from aggregation");
          }
          continue;
        }
        bands.push_back(aggregate_band(it->second));
      }
    }
  }
  return bands;
}

std::vector<AggregateBand> best_bands(std::span<const AggregateBand> bands) {
  std::vector<AggregateBand> best;
  std::map<std::pair<std::string, std::string>, std::size_t> slot;
  for (const auto& b : bands) {
    if (b.median.empty()) continue;
    const auto key = std::make_pair(b.policy, b.setting);
    auto it = slot.find(key);
    if (it == slot.end()) {
      slot[key] = best.size();
      best.push_back(b);
    } else if (b.median.back() < best[it->second].median.back()) {
      best[it->second] = b;
    }
  }
  return best;
}

double loglog_slope(std::span<const std::size_t> steps, std::span<const double> values) {
  if (steps.size() != values.size() || steps.empty()) throw std::invalid_argument("loglog_slope: bad input");
  const double half = static_cast<double>(steps.back()) / 2.0;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const double t = static_cast<double>(steps[i]);
    if (t < half || values[i] <= 0.0) continue;
    const double x = std::log(t);
    const double y = std::log(values[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++n;
  }
  if (n < 2) return 0.0;
  const double dn = static_cast<double>(n);
  const double denom = dn * sxx - sx * sx;
  if (denom <= 0.0) return 0.0;
  return (dn * sxy - sx * sy) / denom;
}

}  // namespace semibandit
