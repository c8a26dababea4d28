#pragma once

// Synthetic semiparametric environments: r = ⟨b_a, μ⟩ + v(t) + ε with a
// fixed μ per replication, an action-independent confounder v(t) and
// Gaussian noise.

#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "semibandit/bandit.hpp"
#include "semibandit/rng.hpp"

namespace semibandit {

enum class ConfounderKind { kNone, kOscillating, kOptimalScaled, kCustom };
enum class ContextMode { kBlock, kSphere };

/// v(t) given the step and ⟨b_{t,a*}, μ⟩.
using ConfounderFn = std::function<double(std::size_t t, double optimal_inner)>;

/// Registers a named confounder usable as Custom(tag). Thread-safe.
void register_confounder(const std::string& tag, ConfounderFn fn);
bool has_confounder(const std::string& tag);

/// Collects validation warnings, each key reported at most once. Shared by
/// every episode of a run; safe for concurrent use.
class WarningLog {
 public:
  explicit WarningLog(bool echo = false) : echo_(echo) {}

  /// Records the message the first time the key is seen.
  void warn_once(const std::string& key, const std::string& message);
  std::vector<std::string> messages() const;
  std::size_t count(const std::string& key) const;

 private:
  bool echo_;
  mutable std::mutex mu_;
  std::set<std::string> keys_;
  std::vector<std::pair<std::string, std::string>> entries_;
};

struct EnvironmentSpec {
  std::size_t n_arms = 2;
  std::size_t dim = 10;
  ConfounderKind confounder = ConfounderKind::kNone;
  std::string custom_tag;  // for kCustom
  double noise_variance = 0.12;
  /// Empty: draw μ uniformly per coordinate on [−0.5, 0.5].
  std::optional<Vector> fixed_mu;
  ContextMode context_mode = ContextMode::kBlock;
  std::uint64_t seed = 0;
  /// Label used in output files; derived from the fields when empty.
  std::string name;

  /// Throws ConfigError when this environment cannot be run.
  void validate() const;
  /// "I", "II", "III" or the custom tag.
  std::string confounder_label() const;
  /// name, or "N<n>_d<d>_<confounder>".
  std::string label() const;
};

Vector gen_mu(const EnvironmentSpec& spec, Rng& rng, WarningLog* log = nullptr);

/// I: 0. II: log₂(t+1)·sin²(0.0005t) + t^{1/4}. III: −cos(0.0005t)·√|optimal_inner|.
double confounder_value(const EnvironmentSpec& spec, std::size_t t, double optimal_inner);

/// Uniform draw from the unit sphere in R^dim (normalized Gaussian).
Vector unit_sphere(std::size_t dim, Rng& rng);

/// One replication's environment state.
class Environment {
 public:
  Environment(EnvironmentSpec spec, std::uint64_t seed, WarningLog* log = nullptr);

  const EnvironmentSpec& spec() const { return spec_; }
  const Vector& mu() const { return mu_; }
  std::size_t t() const { return t_; }
  double cumulative_regret() const { return cumulative_regret_; }

  /// Advances t and draws the next round's contexts.
  RoundContext next_round();

  /// Samples the reward of the chosen arm for the current round and adds
  /// the arm's regret to the running total.
  double realize_reward(const RoundContext& round, std::size_t chosen);

 private:
  EnvironmentSpec spec_;
  Rng rng_;
  WarningLog* log_;
  Vector mu_;
  std::size_t t_ = 0;
  double cumulative_regret_ = 0.0;
  double noise_sd_;
  bool confounder_warned_ = false;
  bool norm_warned_ = false;
  ConfounderFn custom_;
};

/// Draws the contexts of step t from the environment's stream.
RoundContext gen_contexts(const EnvironmentSpec& spec, std::size_t t, Rng& rng);

}  // namespace semibandit
