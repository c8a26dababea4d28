#pragma once

// Vocabulary shared by policies, environments and the harness. Arms are
// 0-based here; CSV files and the CLI print them 1-based.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semibandit/linalg.hpp"
#include "semibandit/rng.hpp"

namespace semibandit {

/// Invalid experiment or policy configuration, detected before any round runs.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The N context vectors observed at step t.
struct RoundContext {
  std::size_t t = 1;
  std::vector<Vector> contexts;

  std::size_t n_arms() const { return contexts.size(); }
  std::size_t dim() const { return contexts.empty() ? 0 : contexts.front().size(); }
};

/// Throws std::invalid_argument unless N >= 2 and all contexts share one length.
void validate_round(const RoundContext& round);

/// True when every ‖b_i‖₂ <= 1 (+1e-12).
bool contexts_within_unit_ball(const RoundContext& round);

/// Named per-round scalars a policy reports alongside its decision.
using Diagnostics = std::vector<std::pair<std::string_view, double>>;

struct Decision {
  std::size_t chosen_arm = 0;
  Vector arm_distribution;
  Vector centered_mean;
  std::vector<std::size_t> surviving_set;
  Diagnostics diagnostics;

  /// Value of a diagnostic entry, or the fallback when absent.
  double diagnostic(std::string_view key, double fallback = 0.0) const;
};

/// Checks the Decision invariants against its round: a probability vector
/// summing to 1 within 1e-12, supported on surviving_set, and
/// centered_mean = Σ π_i b_i within 1e-12. Returns an empty string when all
/// hold, otherwise a description of the first violation.
std::string check_decision(const Decision& decision, const RoundContext& round);

struct Feedback {
  double reward;
  const RoundContext& round;
  const Decision& decision;
};

/// Policy contract used by the harness. choose() must not modify learned
/// state; all learning happens in update().
class Policy {
 public:
  virtual ~Policy() = default;

  virtual std::string_view kind() const = 0;
  /// Clears learned state for a new episode of the given dimension and horizon.
  virtual void reset(std::size_t dim, std::size_t horizon) = 0;
  virtual Decision choose(const RoundContext& round, Rng& rng) const = 0;
  virtual void update(const Feedback& feedback) = 0;
};

/// max_i ⟨μ, b_i⟩ − ⟨μ, b_chosen⟩. The confounder shifts every arm equally
/// and is deliberately absent from the signature.
double instant_regret(std::span<const double> mu, const RoundContext& round, std::size_t chosen);

/// Lowest index attaining max_i ⟨μ, b_i⟩.
std::size_t optimal_arm(std::span<const double> mu, const RoundContext& round);

/// Lowest index attaining max_i scores[i].
std::size_t argmax_lowest(std::span<const double> scores);

}  // namespace semibandit
