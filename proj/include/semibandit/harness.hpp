#pragma once

// Experiment orchestration: policies × environments × γ grid × replications,
// cumulative-regret curves and their median/quartile bands.

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "semibandit/bandit.hpp"
#include "semibandit/baselines.hpp"
#include "semibandit/envs.hpp"
#include "semibandit/gbose.hpp"

namespace semibandit {

struct PolicySpec {
  /// Label in output files.
  std::string name;
  /// gbose | lints | semits | acts, or a kind added with register_policy_kind.
  std::string kind;
  GboseConfig gbose;
  TsConfig ts;
};

/// Builds a policy for one sweep cell. The γ multiplier scales
/// gbose.gamma_multiplier for GBOSE and ts.scale for the sampling policies.
using PolicyFactory = std::function<std::unique_ptr<Policy>(const PolicySpec&, double gamma_multiplier)>;

void register_policy_kind(const std::string& kind, PolicyFactory factory);
bool has_policy_kind(const std::string& kind);
std::unique_ptr<Policy> make_policy(const PolicySpec& spec, double gamma_multiplier);

/// 10^x for 11 evenly spaced x on [−2, 1].
Vector default_gamma_grid();

struct ExperimentConfig {
  std::size_t horizon = 20000;
  std::size_t n_reps = 10;
  Vector gamma_grid = default_gamma_grid();
  std::vector<PolicySpec> policies;
  std::vector<EnvironmentSpec> environments;
  std::uint64_t master_seed = 0;
  std::string output_dir;
  std::size_t parallelism = 1;
  /// Thinning of stored curves and CSV rows; t = 1 and t = T are always kept.
  std::size_t record_every = 10;
  /// Free-form remarks copied into run.json.
  std::vector<std::string> notes;

  /// Throws ConfigError on any invalid field.
  void validate() const;
};

struct CurveMeta {
  std::string policy;
  std::string setting;
  std::size_t n_arms = 0;
  std::size_t dim = 0;
  std::size_t gamma_index = 0;
  double gamma_mult = 1.0;
  std::size_t rep = 0;
  std::uint64_t seed = 0;
};

/// Cumulative regret R(t) at the recorded steps (1-based, increasing).
struct RegretCurve {
  CurveMeta meta;
  std::vector<std::size_t> steps;
  Vector values;
};

/// 1, every, 2·every, …, T (deduplicated, increasing).
std::vector<std::size_t> recorded_steps(std::size_t horizon, std::size_t every);
RegretCurve thin_curve(const RegretCurve& curve, std::size_t every);

/// Full-resolution curve of one replication. The environment and the
/// policy draw from independent streams derived from seed.
RegretCurve run_episode(Policy& policy, const EnvironmentSpec& env_spec, std::size_t horizon, std::uint64_t seed,
                        WarningLog* log = nullptr);

/// Seed of replication rep in environment env_index. Shared by every policy
/// and γ so that comparisons are paired.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t env_index, std::size_t rep);

struct SweepCell {
  std::size_t policy_index;
  std::size_t env_index;
  std::size_t gamma_index;
  std::size_t rep;
};

/// Canonical cell order: policy, environment, γ, replication.
std::vector<SweepCell> enumerate_cells(const ExperimentConfig& config);

struct FailureRecord {
  CurveMeta meta;
  std::string message;
};

struct SweepResult {
  /// Thinned curves of successful cells, canonical order.
  std::vector<RegretCurve> curves;
  std::vector<FailureRecord> failures;
};

/// OpenMP sweep over cells with config.parallelism threads. The result is
/// identical to run_sweep_serial for every thread count.
SweepResult run_sweep(const ExperimentConfig& config, WarningLog* log = nullptr);
/// Single-threaded reference sweep.
SweepResult run_sweep_serial(const ExperimentConfig& config, WarningLog* log = nullptr);

struct AggregateBand {
  std::string policy;
  std::string setting;
  std::size_t gamma_index = 0;
  double gamma_mult = 1.0;
  std::vector<std::size_t> steps;
  Vector median;
  Vector q1;
  Vector q3;
};

/// p-quantile of ascending values, interpolating at rank p·(n−1).
double quantile_linear(std::span<const double> sorted, double p);

/// Pointwise median and quartiles across replications of one cell.
AggregateBand aggregate_band(std::span<const RegretCurve> curves);

struct BestGamma {
  std::size_t gamma_index = 0;
  double gamma_mult = 1.0;
  double median_final = 0.0;
  AggregateBand band;
};

/// γ with the least median R(T) for one (policy, setting); lowest index on
/// ties. A γ with fewer than expected_reps curves is skipped with a warning.
BestGamma select_best_gamma(std::span<const RegretCurve> curves, const std::string& policy,
                            const std::string& setting, std::size_t expected_reps, WarningLog* log = nullptr);

/// One band per complete (policy, environment, γ) group, canonical order.
std::vector<AggregateBand> aggregate_sweep(const SweepResult& result, const ExperimentConfig& config,
                                           WarningLog* log = nullptr);

/// Per (policy, setting), the band with the least final median; the earliest
/// band in input order wins ties.
std::vector<AggregateBand> best_bands(std::span<const AggregateBand> bands);

/// Least-squares slope of log R(t) against log t over t in [T/2, T].
double loglog_slope(std::span<const std::size_t> steps, std::span<const double> values);

}  // namespace semibandit
