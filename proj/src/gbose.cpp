#include "semibandit/gbose.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace semibandit {

EstimatorState::EstimatorState(std::size_t dim, double ridge)
    : psd_(dim, ridge), weighted_sum_(dim, 0.0), mu_hat_(dim, 0.0) {}

void EstimatorState::add_design(std::span<const double> x) { psd_.rank1_update(x); }

void EstimatorState::add_response(std::span<const double> x, double y) {
  if (x.size() != dim()) throw std::invalid_argument("add_response: dimension mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) weighted_sum_[i] += x[i] * y;
}

void EstimatorState::refresh_estimate() { mu_hat_ = mat_vec(psd_.inv(), weighted_sum_); }

void GboseConfig::validate() const {
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("gbose: delta must lie in (0, 1)");
  if (!(gamma_multiplier > 0.0)) throw ConfigError("gbose: gamma_multiplier must be positive");
  if (ridge_override && !(*ridge_override > 0.0)) throw ConfigError("gbose: ridge must be positive");
}

namespace {

void check_schedule_args(std::size_t dim, std::size_t horizon, double delta) {
  if (dim == 0) throw std::invalid_argument("dimension must be positive");
  if (horizon == 0) throw std::invalid_argument("horizon must be positive");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
}

}  // namespace

double theoretical_lambda(std::size_t dim, std::size_t horizon, double delta) {
  check_schedule_args(dim, horizon, delta);
  const double d = static_cast<double>(dim);
  const double t = static_cast<double>(horizon);
  return 4.0 * d * std::log(9.0 * t) + 8.0 * std::log(4.0 * t / delta);
}

double theoretical_gamma(std::size_t dim, std::size_t horizon, double delta, double lambda) {
  check_schedule_args(dim, horizon, delta);
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const double d = static_cast<double>(dim);
  const double t = static_cast<double>(horizon);
  return std::sqrt(lambda) + std::sqrt(27.0 * d * std::log(1.0 + 2.0 * t / d) + 54.0 * std::log(4.0 * t / delta));
}

double lemma_gamma(std::size_t dim, std::size_t horizon, double delta, double lambda) {
  check_schedule_args(dim, horizon, delta);
  if (!(lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
  const double d = static_cast<double>(dim);
  const double t = static_cast<double>(horizon);
  const double radicand = 9.0 * d * std::log(1.0 + t / (d * lambda)) + 18.0 * std::log(t / delta);
  return std::sqrt(lambda) + std::sqrt(std::max(0.0, radicand));
}

PairwiseDistances::PairwiseDistances(const PsdState& psd, const RoundContext& round)
    : n_(round.n_arms()), sq_(n_ * n_, 0.0) {
  Vector diff(round.dim());
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = i + 1; j < n_; ++j) {
      const auto& bi = round.contexts[i];
      const auto& bj = round.contexts[j];
      for (std::size_t k = 0; k < diff.size(); ++k) diff[k] = bi[k] - bj[k];
      const double s = psd.mahalanobis_sq(diff);
      sq_[i * n_ + j] = s;
      sq_[j * n_ + i] = s;
    }
  }
}

std::vector<std::size_t> filter_actions(const EstimatorState& state, const RoundContext& round, double gamma,
                                        const PairwiseDistances& distances) {
  const std::size_t n = round.n_arms();
  Vector value(n);
  for (std::size_t i = 0; i < n; ++i) value[i] = dot(state.mu_hat(), round.contexts[i]);

  std::vector<std::size_t> surviving;
  surviving.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    bool keep = true;
    for (std::size_t j = 0; j < n && keep; ++j) {
      if (j == i) continue;
      keep = value[j] - value[i] <= gamma * std::sqrt(distances.sq(i, j));
    }
    if (keep) surviving.push_back(i);
  }
  if (surviving.empty()) {
    // Unreachable in exact arithmetic: the μ̂-argmax has a non-positive left side.
    surviving.push_back(argmax_lowest(value));
  }
  return surviving;
}

std::vector<std::size_t> filter_actions(const EstimatorState& state, const RoundContext& round, double gamma) {
  return filter_actions(state, round, gamma, PairwiseDistances(state.psd(), round));
}

std::pair<std::size_t, std::size_t> select_pair(const PairwiseDistances& distances,
                                                std::span<const std::size_t> surviving) {
  if (surviving.empty()) throw std::logic_error("select_pair: surviving set is empty");
  std::pair<std::size_t, std::size_t> best{surviving.front(), surviving.front()};
  double best_sq = 0.0;
  for (std::size_t a = 0; a < surviving.size(); ++a) {
    for (std::size_t b = a + 1; b < surviving.size(); ++b) {
      const double s = distances.sq(surviving[a], surviving[b]);
      if (s > best_sq) {
        best_sq = s;
        best = {std::min(surviving[a], surviving[b]), std::max(surviving[a], surviving[b])};
      }
    }
  }
  return best;
}

std::pair<std::size_t, std::size_t> select_pair(const EstimatorState& state, const RoundContext& round,
                                                std::span<const std::size_t> surviving) {
  return select_pair(PairwiseDistances(state.psd(), round), surviving);
}

Vector build_distribution(std::size_t k, std::size_t l, std::size_t n_arms) {
  if (k >= n_arms || l >= n_arms) throw std::invalid_argument("build_distribution: arm index out of range");
  Vector pi(n_arms, 0.0);
  if (k == l) {
    pi[k] = 1.0;
  } else {
    pi[k] = 0.5;
    pi[l] = 0.5;
  }
  return pi;
}

double pair_distribution_slack(const PsdState& psd, const RoundContext& round, const Decision& decision) {
  const std::size_t d = round.dim();
  Vector diff(d);
  auto centered_sq = [&](std::size_t i) {
    for (std::size_t k = 0; k < d; ++k) diff[k] = round.contexts[i][k] - decision.centered_mean[k];
    return psd.mahalanobis_sq(diff);
  };
  double weighted = 0.0;
  for (std::size_t j : decision.surviving_set) {
    const double p = decision.arm_distribution[j];
    if (p > 0.0) weighted += p * centered_sq(j);
  }
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t i : decision.surviving_set) worst = std::max(worst, centered_sq(i) - 4.0 * weighted);
  return worst;
}

Gbose::Gbose(GboseConfig config) : config_(config) { config_.validate(); }

void Gbose::reset(std::size_t dim, std::size_t horizon) {
  const std::size_t t = config_.horizon ? config_.horizon : horizon;
  if (dim == 0 || dim > kMaxDim) throw ConfigError("gbose: dimension must lie in [1, 128]");
  if (t == 0) throw ConfigError("gbose: horizon must be positive");
  lambda_ = config_.ridge_override ? *config_.ridge_override : theoretical_lambda(dim, t, config_.delta);
  base_gamma_ = config_.gamma_rule == GammaRule::kAlgorithm ? theoretical_gamma(dim, t, config_.delta, lambda_)
                                                             : lemma_gamma(dim, t, config_.delta, lambda_);
  state_.emplace(dim, lambda_);
}

Decision Gbose::choose(const RoundContext& round, Rng& rng) const {
  if (!state_) throw std::logic_error("gbose: choose() before reset()");
  validate_round(round);
  if (round.dim() != state_->dim()) throw std::invalid_argument("gbose: context dimension mismatch");

  const PairwiseDistances distances(state_->psd(), round);
  Decision decision;
  decision.surviving_set = filter_actions(*state_, round, gamma(), distances);
  const auto [k, l] = select_pair(distances, decision.surviving_set);
  decision.arm_distribution = build_distribution(k, l, round.n_arms());

  const double u = rng.uniform();
  decision.chosen_arm = u < decision.arm_distribution[k] ? k : l;

  if (k == l) {
    decision.centered_mean = round.contexts[k];
  } else {
    decision.centered_mean.resize(round.dim());
    for (std::size_t c = 0; c < round.dim(); ++c)
      decision.centered_mean[c] = 0.5 * round.contexts[k][c] + 0.5 * round.contexts[l][c];
  }

  decision.diagnostics = {
      {"surviving", static_cast<double>(decision.surviving_set.size())},
      {"max_pair_distance", std::sqrt(distances.sq(k, l))},
      {"mu_hat_norm", norm2(state_->mu_hat())},
  };

  if (config_.check_invariants) {
    const double slack = pair_distribution_slack(state_->psd(), round, decision);
    if (slack > 1e-9) throw std::logic_error("gbose: pair distribution bound violated");
  }
  return decision;
}

void Gbose::update(const Feedback& feedback) {
  if (!state_) throw std::logic_error("gbose: update() before reset()");
  const auto& chosen = feedback.round.contexts.at(feedback.decision.chosen_arm);
  const auto& centered = feedback.decision.centered_mean;
  if (chosen.size() != state_->dim() || centered.size() != state_->dim()) {
    throw std::invalid_argument("gbose: feedback dimension mismatch");
  }
  Vector x(chosen.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = chosen[i] - centered[i];
  state_->add_design(x);
  state_->add_response(x, feedback.reward);
  state_->refresh_estimate();
}

}  // namespace semibandit
