#include "semibandit/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace semibandit {

void validate_round(const RoundContext& round) {
  if (round.n_arms() < 2) throw std::invalid_argument("round must offer at least two arms");
  const std::size_t d = round.dim();
  if (d == 0) throw std::invalid_argument("context vectors must be nonempty");
  for (const auto& b : round.contexts) {
    if (b.size() != d) throw std::invalid_argument("context vectors must share one dimension");
  }
}

bool contexts_within_unit_ball(const RoundContext& round) {
  return std::all_of(round.contexts.begin(), round.contexts.end(),
                     [](const Vector& b) { return norm2(b) <= 1.0 + 1e-12; });
}

double Decision::diagnostic(std::string_view key, double fallback) const {
  for (const auto& [k, v] : diagnostics)
    if (k == key) return v;
  return fallback;
}

std::string check_decision(const Decision& decision, const RoundContext& round) {
  const std::size_t n = round.n_arms();
  std::ostringstream err;
  if (decision.arm_distribution.size() != n) return "arm_distribution has wrong length";
  if (decision.chosen_arm >= n) return "chosen_arm out of range";
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = decision.arm_distribution[i];
    if (p < 0.0) {
      err << "negative probability at arm " << i;
      return err.str();
    }
    total += p;
    const bool in_set = std::find(decision.surviving_set.begin(), decision.surviving_set.end(), i) !=
                        decision.surviving_set.end();
    if (p > 0.0 && !in_set) {
      err << "probability mass on arm " << i << " outside the surviving set";
      return err.str();
    }
  }
  if (std::abs(total - 1.0) > 1e-12) {
    err << "arm_distribution sums to " << total;
    return err.str();
  }
  if (decision.arm_distribution[decision.chosen_arm] <= 0.0) return "chosen arm has zero probability";
  const std::size_t d = round.dim();
  if (decision.centered_mean.size() != d) return "centered_mean has wrong length";
  for (std::size_t k = 0; k < d; ++k) {
    double expect = 0.0;
    for (std::size_t i = 0; i < n; ++i) expect += decision.arm_distribution[i] * round.contexts[i][k];
    if (std::abs(expect - decision.centered_mean[k]) > 1e-12) {
      err << "centered_mean coordinate " << k << " differs from the π-weighted context mean";
      return err.str();
    }
  }
  return {};
}

std::size_t argmax_lowest(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i)
    if (scores[i] > scores[best]) best = i;
  return best;
}

std::size_t optimal_arm(std::span<const double> mu, const RoundContext& round) {
  if (round.n_arms() == 0) throw std::invalid_argument("optimal_arm: empty round");
  Vector values(round.n_arms());
  for (std::size_t i = 0; i < round.n_arms(); ++i) values[i] = dot(mu, round.contexts[i]);
  return argmax_lowest(values);
}

double instant_regret(std::span<const double> mu, const RoundContext& round, std::size_t chosen) {
  if (chosen >= round.n_arms()) throw std::invalid_argument("instant_regret: arm index out of range");
  double best = dot(mu, round.contexts[0]);
  for (std::size_t i = 1; i < round.n_arms(); ++i) best = std::max(best, dot(mu, round.contexts[i]));
  return std::max(0.0, best - dot(mu, round.contexts[chosen]));
}

}  // namespace semibandit
