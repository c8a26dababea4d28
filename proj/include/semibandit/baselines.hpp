#pragma once

// Comparison policies, each reconstructed from its original reference:
//
//   LinTs              linear Thompson sampling (Agrawal & Goyal, 2013) on an
//                      uncentered ridge estimator.
//   SemiparametricTs   Thompson sampling with a centered estimator whose
//                      centering distribution is the sampler's own argmax
//                      distribution (Kim & Paik, 2019), estimated by Monte Carlo.
//   ActionCenteredTs   two-stage Thompson sampling against a base arm with
//                      clipped play probability and a pseudo-outcome
//                      estimator (Greenewald et al., 2017).

#include <cstddef>
#include <optional>
#include <utility>

#include "semibandit/bandit.hpp"
#include "semibandit/gbose.hpp"

namespace semibandit {

struct TsConfig {
  /// Posterior-width multiplier v: draws use covariance v²·B⁻¹.
  double scale = 1.0;
  double ridge = 1.0;
  /// Draws per round for the argmax-probability estimate (SemiparametricTs).
  std::size_t mc_samples = 1000;
  /// Play-probability clip (ActionCenteredTs).
  std::pair<double, double> clip{0.1, 0.9};

  void validate() const;
};

/// Standard normal CDF.
double normal_cdf(double x);

class LinTs final : public Policy {
 public:
  explicit LinTs(TsConfig config = {});

  std::string_view kind() const override { return "lints"; }
  void reset(std::size_t dim, std::size_t horizon) override;
  Decision choose(const RoundContext& round, Rng& rng) const override;
  void update(const Feedback& feedback) override;

  const TsConfig& config() const { return config_; }
  const EstimatorState& estimator() const { return *state_; }

 private:
  TsConfig config_;
  std::optional<EstimatorState> state_;
};

class SemiparametricTs final : public Policy {
 public:
  explicit SemiparametricTs(TsConfig config = {});

  std::string_view kind() const override { return "semits"; }
  void reset(std::size_t dim, std::size_t horizon) override;
  /// The realized draw picks the arm and is the first of the mc_samples draws
  /// behind π, so the chosen arm always carries positive probability.
  Decision choose(const RoundContext& round, Rng& rng) const override;
  /// B += (b_a − b̄)(b_a − b̄)ᵀ + Σ π_i (b_i − b̄)(b_i − b̄)ᵀ; S += 2(b_a − b̄)r.
  void update(const Feedback& feedback) override;

  const TsConfig& config() const { return config_; }
  const EstimatorState& estimator() const { return *state_; }

 private:
  TsConfig config_;
  std::optional<EstimatorState> state_;
};

/// Arm 0 is the base arm. The learner models each arm by its context
/// relative to the base context, which is the plain context when the base
/// context is zero.
class ActionCenteredTs final : public Policy {
 public:
  explicit ActionCenteredTs(TsConfig config = {});

  std::string_view kind() const override { return "acts"; }
  void reset(std::size_t dim, std::size_t horizon) override;
  Decision choose(const RoundContext& round, Rng& rng) const override;
  /// With π the play probability of the stage-1 arm ā and x = b_ā − b_base:
  /// B += π(1−π) x xᵀ; S += x (1{a = ā} − π) r.
  void update(const Feedback& feedback) override;

  const TsConfig& config() const { return config_; }
  const EstimatorState& estimator() const { return *state_; }

 private:
  TsConfig config_;
  std::optional<EstimatorState> state_;
};

}  // namespace semibandit
