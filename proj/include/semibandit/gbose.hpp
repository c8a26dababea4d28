#pragma once

// GBOSE: arm elimination under a γ-scaled B⁻¹ confidence width, an explicit
// two-point action distribution on the most distant surviving pair, and an
// orthogonalized (centered) ridge estimator.

#include <cstddef>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "semibandit/bandit.hpp"
#include "semibandit/linalg.hpp"

namespace semibandit {

/// B, S = Σ x_τ r_τ and μ̂ = B⁻¹ S for a ridge regression fed one weighted
/// design vector at a time. Used by GBOSE and the Thompson-sampling baselines.
class EstimatorState {
 public:
  EstimatorState(std::size_t dim, double ridge);

  std::size_t dim() const { return psd_.dim(); }
  const PsdState& psd() const { return psd_; }
  const Vector& weighted_sum() const { return weighted_sum_; }
  const Vector& mu_hat() const { return mu_hat_; }

  /// B += x xᵀ without touching S.
  void add_design(std::span<const double> x);
  /// S += x · y.
  void add_response(std::span<const double> x, double y);
  /// μ̂ ← B⁻¹ S.
  void refresh_estimate();

 private:
  PsdState psd_;
  Vector weighted_sum_;
  Vector mu_hat_;
};

enum class GammaRule {
  kAlgorithm,  // √λ + √(27d ln(1+2T/d) + 54 ln(4T/δ))
  kLemma,      // √λ + √(9d ln(1+T/(dλ)) + 18 ln(T/δ))
};

struct GboseConfig {
  /// 0 means "use the horizon passed to reset()".
  std::size_t horizon = 0;
  double delta = 0.05;
  double gamma_multiplier = 1.0;
  std::optional<double> ridge_override;
  GammaRule gamma_rule = GammaRule::kAlgorithm;
  /// Throw std::logic_error if the pair-distribution bound fails in a round.
  bool check_invariants = false;

  void validate() const;
};

/// 4d·ln(9T) + 8·ln(4T/δ).
double theoretical_lambda(std::size_t dim, std::size_t horizon, double delta);
/// √λ + √(27d·ln(1 + 2T/d) + 54·ln(4T/δ)).
double theoretical_gamma(std::size_t dim, std::size_t horizon, double delta, double lambda);
/// √λ + √(9d·ln(1 + T/(dλ)) + 18·ln(T/δ)), the width stated with the concentration bound.
double lemma_gamma(std::size_t dim, std::size_t horizon, double delta, double lambda);

/// Squared B⁻¹ distances between every pair of arms of one round.
class PairwiseDistances {
 public:
  PairwiseDistances(const PsdState& psd, const RoundContext& round);

  std::size_t n_arms() const { return n_; }
  double sq(std::size_t i, std::size_t j) const { return sq_[i * n_ + j]; }

 private:
  std::size_t n_;
  std::vector<double> sq_;
};

/// Arms i with ⟨μ̂, b_j − b_i⟩ <= γ‖b_i − b_j‖_{B⁻¹} for every j, ascending.
std::vector<std::size_t> filter_actions(const EstimatorState& state, const RoundContext& round, double gamma);
std::vector<std::size_t> filter_actions(const EstimatorState& state, const RoundContext& round, double gamma,
                                        const PairwiseDistances& distances);

/// Most B⁻¹-distant pair (k <= l) among the surviving arms; (m, m) for a
/// single survivor or when every distance is zero.
std::pair<std::size_t, std::size_t> select_pair(const PairwiseDistances& distances,
                                                std::span<const std::size_t> surviving);
std::pair<std::size_t, std::size_t> select_pair(const EstimatorState& state, const RoundContext& round,
                                                std::span<const std::size_t> surviving);

/// π_k = π_l = 1/2 (π_k = 1 when k == l), zero elsewhere.
Vector build_distribution(std::size_t k, std::size_t l, std::size_t n_arms);

/// Largest violation max_i (‖b_i − b̄‖² − 4 Σ_j π_j ‖b_j − b̄‖²) over surviving
/// arms, in the B⁻¹ metric. Non-positive when the bound holds.
double pair_distribution_slack(const PsdState& psd, const RoundContext& round, const Decision& decision);

class Gbose final : public Policy {
 public:
  explicit Gbose(GboseConfig config = {});

  std::string_view kind() const override { return "gbose"; }
  void reset(std::size_t dim, std::size_t horizon) override;
  Decision choose(const RoundContext& round, Rng& rng) const override;
  void update(const Feedback& feedback) override;

  const GboseConfig& config() const { return config_; }
  const EstimatorState& estimator() const { return *state_; }
  double lambda() const { return lambda_; }
  /// Theoretical width for the configured horizon, before the multiplier.
  double base_gamma() const { return base_gamma_; }
  /// Width actually used by the filter.
  double gamma() const { return base_gamma_ * config_.gamma_multiplier; }

 private:
  GboseConfig config_;
  std::optional<EstimatorState> state_;
  double lambda_ = 0.0;
  double base_gamma_ = 0.0;
};

}  // namespace semibandit
