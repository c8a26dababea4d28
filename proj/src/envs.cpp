#include "semibandit/envs.hpp"

#include <cmath>
#include <iostream>
#include <map>
#include <sstream>

namespace semibandit {

namespace {

struct ConfounderRegistry {
  std::mutex mu;
  std::map<std::string, ConfounderFn> fns;
};

ConfounderRegistry& registry() {
  static ConfounderRegistry r;
  return r;
}

ConfounderFn lookup_confounder(const std::string& tag) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  auto it = r.fns.find(tag);
  if (it == r.fns.end()) throw ConfigError("unknown custom confounder '" + tag + "'");
  return it->second;
}

}  // namespace

void register_confounder(const std::string& tag, ConfounderFn fn) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  r.fns[tag] = std::move(fn);
}

bool has_confounder(const std::string& tag) {
  auto& r = registry();
  std::lock_guard lock(r.mu);
  return r.fns.count(tag) > 0;
}

void WarningLog::warn_once(const std::string& key, const std::string& message) {
  std::lock_guard lock(mu_);
  if (!keys_.insert(key).second) return;
  entries_.emplace_back(key, message);
  if (echo_) std::cerr << "warning: " << message << '\n';
}

std::vector<std::string> WarningLog::messages() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [k, m] : entries_) out.push_back(m);
  return out;
}

std::size_t WarningLog::count(const std::string& key) const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [k, m] : entries_)
    if (k == key) ++n;
  return n;
}

void EnvironmentSpec::validate() const {
  if (n_arms < 2) throw ConfigError("environment: n_arms must be at least 2");
  if (dim == 0 || dim > kMaxDim) throw ConfigError("environment: dim must lie in [1, 128]");
  if (!(noise_variance > 0.0)) throw ConfigError("environment: noise_variance must be positive");
  if (context_mode == ContextMode::kBlock && dim % (n_arms - 1) != 0) {
    throw ConfigError("environment: block contexts need (n_arms - 1) to divide dim (n_arms=" +
                      std::to_string(n_arms) + ", dim=" + std::to_string(dim) + ")");
  }
  if (fixed_mu && fixed_mu->size() != dim) throw ConfigError("environment: fixed mu has the wrong length");
  if (confounder == ConfounderKind::kCustom && !has_confounder(custom_tag)) {
    throw ConfigError("environment: unknown custom confounder '" + custom_tag + "'");
  }
}

std::string EnvironmentSpec::confounder_label() const {
  switch (confounder) {
    case ConfounderKind::kNone: return "I";
    case ConfounderKind::kOscillating: return "II";
    case ConfounderKind::kOptimalScaled: return "III";
    case ConfounderKind::kCustom: return custom_tag;
  }
  return "?";
}

std::string EnvironmentSpec::label() const {
  if (!name.empty()) return name;
  std::ostringstream os;
  os << 'N' << n_arms << "_d" << dim << '_' << confounder_label();
  return os.str();
}

Vector gen_mu(const EnvironmentSpec& spec, Rng& rng, WarningLog* log) {
  Vector mu;
  if (spec.fixed_mu) {
    mu = *spec.fixed_mu;
  } else {
    mu.resize(spec.dim);
    for (auto& m : mu) m = rng.uniform() - 0.5;
  }
  if (log && norm2(mu) > 1.0) {
    log->warn_once("mu-norm", "a drawn mu has norm above 1; the bounded-parameter assumption does not hold");
  }
  return mu;
}

double confounder_value(const EnvironmentSpec& spec, std::size_t t, double optimal_inner) {
  const double tt = static_cast<double>(t);
  switch (spec.confounder) {
    case ConfounderKind::kNone: return 0.0;
    case ConfounderKind::kOscillating: {
      const double s = std::sin(0.0005 * tt);
      return std::log2(tt + 1.0) * s * s + std::pow(tt, 0.25);
    }
    case ConfounderKind::kOptimalScaled:
      return -std::cos(0.0005 * tt) * std::sqrt(std::abs(optimal_inner));
    case ConfounderKind::kCustom: return lookup_confounder(spec.custom_tag)(t, optimal_inner);
  }
  return 0.0;
}

Vector unit_sphere(std::size_t dim, Rng& rng) {
  Vector z(dim);
  double n = 0.0;
  do {
    for (auto& zi : z) zi = rng.normal();
    n = norm2(z);
  } while (n == 0.0);
  for (auto& zi : z) zi /= n;
  return z;
}

RoundContext gen_contexts(const EnvironmentSpec& spec, std::size_t t, Rng& rng) {
  RoundContext round;
  round.t = t;
  round.contexts.assign(spec.n_arms, Vector(spec.dim, 0.0));
  if (spec.context_mode == ContextMode::kSphere) {
    for (auto& b : round.contexts) b = unit_sphere(spec.dim, rng);
    return round;
  }
  const std::size_t width = spec.dim / (spec.n_arms - 1);
  for (std::size_t i = 1; i < spec.n_arms; ++i) {
    const Vector z = unit_sphere(width, rng);
    std::copy(z.begin(), z.end(), round.contexts[i].begin() + static_cast<std::ptrdiff_t>((i - 1) * width));
  }
  return round;
}

Environment::Environment(EnvironmentSpec spec, std::uint64_t seed, WarningLog* log)
    : spec_(std::move(spec)), rng_(seed), log_(log), noise_sd_(0.0) {
  spec_.validate();
  noise_sd_ = std::sqrt(spec_.noise_variance);
  if (spec_.confounder == ConfounderKind::kCustom) custom_ = lookup_confounder(spec_.custom_tag);
  mu_ = gen_mu(spec_, rng_, log_);
}

RoundContext Environment::next_round() {
  ++t_;
  RoundContext round = gen_contexts(spec_, t_, rng_);
  if (log_ && !norm_warned_ && !contexts_within_unit_ball(round)) {
    norm_warned_ = true;
    log_->warn_once("context-norm", "a context vector has norm above 1");
  }
  return round;
}

double Environment::realize_reward(const RoundContext& round, std::size_t chosen) {
  const std::size_t best = optimal_arm(mu_, round);
  const double optimal_inner = dot(round.contexts[best], mu_);
  const double v = custom_ ? custom_(round.t, optimal_inner) : confounder_value(spec_, round.t, optimal_inner);
  if (log_ && !confounder_warned_ && std::abs(v) > 1.0) {
    confounder_warned_ = true;
    log_->warn_once("confounder-bound", "confounder v(t) leaves [-1, 1]; the bounded-confounder assumption does not hold");
  }
  const double eps = noise_sd_ * rng_.normal();
  cumulative_regret_ += instant_regret(mu_, round, chosen);
  return dot(round.contexts[chosen], mu_) + v + eps;
}

}  // namespace semibandit
