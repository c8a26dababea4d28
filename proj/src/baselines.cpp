#include "semibandit/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace semibandit {

void TsConfig::validate() const {
  if (!(scale >= 0.0)) throw ConfigError("ts: scale must be non-negative");
  if (!(ridge > 0.0)) throw ConfigError("ts: ridge must be positive");
  if (mc_samples == 0) throw ConfigError("ts: mc_samples must be positive");
  const auto [lo, hi] = clip;
  if (!(lo > 0.0 && hi < 1.0 && lo <= hi)) throw ConfigError("ts: clip must satisfy 0 < p_min <= p_max < 1");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

namespace {

void check_round(const RoundContext& round, const std::optional<EstimatorState>& state, const char* who) {
  if (!state) throw std::logic_error(std::string(who) + ": choose() before reset()");
  validate_round(round);
  if (round.dim() != state->dim()) throw std::invalid_argument(std::string(who) + ": context dimension mismatch");
}

void check_feedback(const Feedback& feedback, const std::optional<EstimatorState>& state, const char* who) {
  if (!state) throw std::logic_error(std::string(who) + ": update() before reset()");
  if (feedback.round.dim() != state->dim() || feedback.decision.centered_mean.size() != state->dim()) {
    throw std::invalid_argument(std::string(who) + ": feedback dimension mismatch");
  }
}

std::vector<std::size_t> all_arms(std::size_t n) {
  std::vector<std::size_t> arms(n);
  for (std::size_t i = 0; i < n; ++i) arms[i] = i;
  return arms;
}

/// μ̂ + scale·L·z with L the Cholesky factor of B⁻¹; μ̂ itself when scale is 0.
Vector posterior_draw(const EstimatorState& state, double scale, Rng& rng) {
  if (scale == 0.0) return state.mu_hat();
  return sample_mvn_factor(state.mu_hat(), cholesky(state.psd().inv()), scale, rng);
}

Vector scores_under(const RoundContext& round, std::span<const double> theta) {
  Vector s(round.n_arms());
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = dot(round.contexts[i], theta);
  return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// LinTs

LinTs::LinTs(TsConfig config) : config_(config) { config_.validate(); }

void LinTs::reset(std::size_t dim, std::size_t /*horizon*/) {
  if (dim == 0 || dim > kMaxDim) throw ConfigError("lints: dimension must lie in [1, 128]");
  state_.emplace(dim, config_.ridge);
}

Decision LinTs::choose(const RoundContext& round, Rng& rng) const {
  check_round(round, state_, "lints");
  const Vector theta = posterior_draw(*state_, config_.scale, rng);
  Decision decision;
  decision.chosen_arm = argmax_lowest(scores_under(round, theta));
  decision.arm_distribution.assign(round.n_arms(), 0.0);
  decision.arm_distribution[decision.chosen_arm] = 1.0;
  decision.centered_mean = round.contexts[decision.chosen_arm];
  decision.surviving_set = all_arms(round.n_arms());
  decision.diagnostics = {{"sample_norm", norm2(theta)}};
  return decision;
}

void LinTs::update(const Feedback& feedback) {
  check_feedback(feedback, state_, "lints");
  const auto& b = feedback.round.contexts.at(feedback.decision.chosen_arm);
  state_->add_design(b);
  state_->add_response(b, feedback.reward);
  state_->refresh_estimate();
}

// ---------------------------------------------------------------------------
// SemiparametricTs

SemiparametricTs::SemiparametricTs(TsConfig config) : config_(config) { config_.validate(); }

void SemiparametricTs::reset(std::size_t dim, std::size_t /*horizon*/) {
  if (dim == 0 || dim > kMaxDim) throw ConfigError("semits: dimension must lie in [1, 128]");
  state_.emplace(dim, config_.ridge);
}

namespace {

// Columns c of a lower factor with G = Σ_c c cᵀ for symmetric PSD G (lower
// triangle, row-major). Pivots at rounding level are dropped, so the number
// of columns is the numerical rank.
std::vector<double> semidefinite_factor(std::vector<double> g, std::size_t n) {
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) scale = std::max(scale, g[i * n + i]);
  const double tol = 1e-12 * scale;
  std::vector<double> cols;
  for (std::size_t k = 0; k < n; ++k) {
    const double pivot = g[k * n + k];
    if (!(pivot > tol)) continue;
    const double root = std::sqrt(pivot);
    std::vector<double> c(n, 0.0);
    for (std::size_t i = k; i < n; ++i) c[i] = g[i * n + k] / root;
    for (std::size_t i = k; i < n; ++i)
      for (std::size_t j = k; j <= i; ++j) g[i * n + j] -= c[i] * c[j];
    cols.insert(cols.end(), c.begin(), c.end());
  }
  return cols;
}

}  // namespace

Decision SemiparametricTs::choose(const RoundContext& round, Rng& rng) const {
  check_round(round, state_, "semits");
  const std::size_t n = round.n_arms();
  const std::size_t d = round.dim();
  const Vector mean_scores = scores_under(round, state_->mu_hat());

  Decision decision;
  decision.arm_distribution.assign(n, 0.0);
  double sample_norm = norm2(state_->mu_hat());

  if (config_.scale == 0.0) {
    decision.chosen_arm = argmax_lowest(mean_scores);
    decision.arm_distribution[decision.chosen_arm] = 1.0;
  } else {
    // ⟨b_i, μ̂ + v·L·z⟩ = m_i + v·⟨Lᵀb_i, z⟩, so each draw costs d normals
    // and an N×d product.
    const Matrix lower = cholesky(state_->psd().inv());
    std::vector<double> projected(n * d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t k = 0; k < d; ++k) {
        double s = 0.0;
        for (std::size_t j = k; j < d; ++j) s += lower(j, k) * round.contexts[i][j];
        projected[i * d + k] = config_.scale * s;
      }

    // First draw in parameter space: it picks the played arm and gives the
    // sample norm.
    Vector z(d);
    for (auto& zk : z) zk = rng.normal();
    Vector scores(n);
    for (std::size_t i = 0; i < n; ++i) {
      double s = mean_scores[i];
      for (std::size_t k = 0; k < d; ++k) s += projected[i * d + k] * z[k];
      scores[i] = s;
    }
    decision.chosen_arm = argmax_lowest(scores);
    {
      Vector theta(state_->mu_hat());
      for (std::size_t r = 0; r < d; ++r)
        for (std::size_t k = 0; k <= r; ++k) theta[r] += config_.scale * lower(r, k) * z[k];
      sample_norm = norm2(theta);
    }
    std::vector<std::size_t> counts(n, 0);
    ++counts[decision.chosen_arm];

    // Remaining draws only need the score vector, which is Gaussian with
    // covariance P Pᵀ of rank r <= min(N, d). Sample it through a
    // semidefinite factor when that takes fewer normals than d.
    std::size_t rank = d;
    std::vector<double> factor;
    if (n < d) {
      std::vector<double> gram(n * n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
          double s = 0.0;
          for (std::size_t k = 0; k < d; ++k) s += projected[i * d + k] * projected[j * d + k];
          gram[i * n + j] = s;
        }
      const std::vector<double> cols = semidefinite_factor(gram, n);
      rank = cols.size() / n;
      if (rank < d) factor = cols;
    }
    if (!factor.empty()) {
      // factor holds rank columns of length n; store row-major for the loop
      std::vector<double> rows(n * rank);
      for (std::size_t c = 0; c < rank; ++c)
        for (std::size_t i = 0; i < n; ++i) rows[i * rank + c] = factor[c * n + i];
      Vector w(rank);
      for (std::size_t draw = 1; draw < config_.mc_samples; ++draw) {
        for (auto& wk : w) wk = rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
          const double* p = rows.data() + i * rank;
          double s = mean_scores[i];
          for (std::size_t k = 0; k < rank; ++k) s += p[k] * w[k];
          scores[i] = s;
        }
        ++counts[argmax_lowest(scores)];
      }
    } else {
      for (std::size_t draw = 1; draw < config_.mc_samples; ++draw) {
        for (auto& zk : z) zk = rng.normal();
        for (std::size_t i = 0; i < n; ++i) {
          const double* p = projected.data() + i * d;
          double s = mean_scores[i];
          for (std::size_t k = 0; k < d; ++k) s += p[k] * z[k];
          scores[i] = s;
        }
        ++counts[argmax_lowest(scores)];
      }
    }
    const double m = static_cast<double>(config_.mc_samples);
    for (std::size_t i = 0; i < n; ++i) decision.arm_distribution[i] = static_cast<double>(counts[i]) / m;
  }

  decision.centered_mean.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = decision.arm_distribution[i];
    if (p > 0.0) decision.surviving_set.push_back(i);
  }
  for (std::size_t c = 0; c < d; ++c) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += decision.arm_distribution[i] * round.contexts[i][c];
    decision.centered_mean[c] = s;
  }
  decision.diagnostics = {{"sample_norm", sample_norm}};
  return decision;
}

void SemiparametricTs::update(const Feedback& feedback) {
  check_feedback(feedback, state_, "semits");
  const auto& round = feedback.round;
  const auto& decision = feedback.decision;
  const auto& centered = decision.centered_mean;
  const std::size_t d = state_->dim();

  Vector x(d);
  const auto& chosen = round.contexts.at(decision.chosen_arm);
  for (std::size_t k = 0; k < d; ++k) x[k] = chosen[k] - centered[k];
  state_->add_design(x);
  state_->add_response(x, 2.0 * feedback.reward);

  Vector y(d);
  for (std::size_t i : decision.surviving_set) {
    const double w = std::sqrt(decision.arm_distribution[i]);
    for (std::size_t k = 0; k < d; ++k) y[k] = w * (round.contexts[i][k] - centered[k]);
    state_->add_design(y);
  }
  state_->refresh_estimate();
}

// ---------------------------------------------------------------------------
// ActionCenteredTs

ActionCenteredTs::ActionCenteredTs(TsConfig config) : config_(config) { config_.validate(); }

void ActionCenteredTs::reset(std::size_t dim, std::size_t /*horizon*/) {
  if (dim == 0 || dim > kMaxDim) throw ConfigError("acts: dimension must lie in [1, 128]");
  state_.emplace(dim, config_.ridge);
}

Decision ActionCenteredTs::choose(const RoundContext& round, Rng& rng) const {
  check_round(round, state_, "acts");
  const std::size_t n = round.n_arms();
  const std::size_t d = round.dim();
  const auto& base = round.contexts[0];

  const Vector theta = posterior_draw(*state_, config_.scale, rng);
  std::size_t stage1 = 1;
  double best = dot(round.contexts[1], theta);
  for (std::size_t i = 2; i < n; ++i) {
    const double s = dot(round.contexts[i], theta);
    if (s > best) {
      best = s;
      stage1 = i;
    }
  }

  Vector rel(d);
  for (std::size_t k = 0; k < d; ++k) rel[k] = round.contexts[stage1][k] - base[k];
  const double mean = dot(rel, state_->mu_hat());
  const double var = state_->psd().mahalanobis_sq(rel);
  double play = 0.0;
  if (config_.scale > 0.0 && var > 0.0) {
    play = normal_cdf(mean / (config_.scale * std::sqrt(var)));
  } else {
    play = mean > 0.0 ? 1.0 : 0.0;
  }
  play = std::clamp(play, config_.clip.first, config_.clip.second);

  Decision decision;
  decision.chosen_arm = rng.uniform() < play ? stage1 : 0;
  decision.arm_distribution.assign(n, 0.0);
  decision.arm_distribution[0] = 1.0 - play;
  decision.arm_distribution[stage1] = play;
  decision.surviving_set = {0, stage1};
  decision.centered_mean.resize(d);
  for (std::size_t c = 0; c < d; ++c)
    decision.centered_mean[c] = (1.0 - play) * base[c] + play * round.contexts[stage1][c];
  decision.diagnostics = {
      {"pi_play", play},
      {"stage1_arm", static_cast<double>(stage1)},
      {"sample_norm", norm2(theta)},
  };
  return decision;
}

void ActionCenteredTs::update(const Feedback& feedback) {
  check_feedback(feedback, state_, "acts");
  const auto& round = feedback.round;
  const auto& decision = feedback.decision;
  if (decision.surviving_set.size() != 2) throw std::invalid_argument("acts: decision lacks a stage-1 arm");
  const std::size_t stage1 = decision.surviving_set[1];
  const double play = decision.arm_distribution.at(stage1);
  const std::size_t d = state_->dim();

  Vector x(d);
  for (std::size_t k = 0; k < d; ++k) x[k] = round.contexts[stage1][k] - round.contexts[0][k];
  const double w = std::sqrt(play * (1.0 - play));
  Vector wx(d);
  for (std::size_t k = 0; k < d; ++k) wx[k] = w * x[k];
  state_->add_design(wx);
  const double indicator = decision.chosen_arm == stage1 ? 1.0 : 0.0;
  state_->add_response(x, (indicator - play) * feedback.reward);
  state_->refresh_estimate();
}

}  // namespace semibandit
