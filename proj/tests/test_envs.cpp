#include <cmath>

#include "doctest.h"
#include "semibandit/envs.hpp"

using namespace semibandit;

namespace {

EnvironmentSpec spec_of(std::size_t n, std::size_t d, ConfounderKind c = ConfounderKind::kNone) {
  EnvironmentSpec s;
  s.n_arms = n;
  s.dim = d;
  s.confounder = c;
  return s;
}

}  // namespace

TEST_CASE("mu draws") {
  Rng rng(10);
  const auto spec = spec_of(2, 10);
  for (int k = 0; k < 100; ++k)
    for (double v : gen_mu(spec, rng)) {
      CHECK(v >= -0.5);
      CHECK(v <= 0.5);
    }
  Rng a(3), b(3);
  CHECK(gen_mu(spec, a) == gen_mu(spec, b));

  Rng m(99);
  const auto one = spec_of(2, 1);
  const int n = 100000;
  double s = 0, q = 0;
  for (int i = 0; i < n; ++i) {
    const double v = gen_mu(one, m)[0];
    s += v;
    q += v * v;
  }
  const double mean = s / n;
  const double var = q / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var / (1.0 / 12.0) - 1.0) < 0.05);

  auto fixed = spec_of(2, 2);
  fixed.fixed_mu = Vector{0.1, -0.2};
  CHECK(gen_mu(fixed, m) == Vector{0.1, -0.2});
}

TEST_CASE("block contexts") {
  Rng rng(1);
  const auto r = gen_contexts(spec_of(2, 10), 1, rng);
  CHECK(r.contexts[0] == Vector(10, 0.0));
  CHECK(norm2(r.contexts[1]) == doctest::Approx(1.0).epsilon(1e-12));

  const auto r3 = gen_contexts(spec_of(3, 4), 1, rng);
  CHECK(r3.contexts[0] == Vector(4, 0.0));
  const auto& b2 = r3.contexts[1];
  const auto& b3 = r3.contexts[2];
  CHECK(b2[2] == 0.0);
  CHECK(b2[3] == 0.0);
  CHECK(b3[0] == 0.0);
  CHECK(b3[1] == 0.0);
  CHECK(std::hypot(b2[0], b2[1]) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::hypot(b3[2], b3[3]) == doctest::Approx(1.0).epsilon(1e-12));

  auto bad = spec_of(10, 2);
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("sphere contexts") {
  Rng rng(2);
  for (auto [n, d] : {std::pair{10u, 2u}, std::pair{10u, 10u}, std::pair{3u, 7u}}) {
    auto s = spec_of(n, d);
    s.context_mode = ContextMode::kSphere;
    CHECK_NOTHROW(s.validate());
    const auto r = gen_contexts(s, 1, rng);
    CHECK(r.n_arms() == n);
    for (const auto& b : r.contexts) CHECK(std::abs(norm2(b) - 1.0) < 1e-12);
  }
}

TEST_CASE("confounders") {
  const auto none = spec_of(2, 10);
  CHECK(confounder_value(none, 1, 0.3) == 0.0);
  CHECK(confounder_value(none, 777, -0.3) == 0.0);

  const auto osc = spec_of(2, 10, ConfounderKind::kOscillating);
  const double expect1 = std::log2(2.0) * std::pow(std::sin(0.0005), 2) + 1.0;
  CHECK(confounder_value(osc, 1, 0.0) == doctest::Approx(expect1).epsilon(1e-15));
  CHECK(confounder_value(osc, 1, 0.0) == doctest::Approx(1.00000025).epsilon(1e-9));
  const double t = 12345;
  CHECK(confounder_value(osc, 12345, 0.9) ==
        doctest::Approx(std::log2(t + 1) * std::pow(std::sin(0.0005 * t), 2) + std::pow(t, 0.25)));

  const auto opt = spec_of(2, 10, ConfounderKind::kOptimalScaled);
  CHECK(confounder_value(opt, 5, 0.0) == 0.0);
  CHECK(confounder_value(opt, 5000, -0.49) == doctest::Approx(-std::cos(2.5) * 0.7));

  register_confounder("plus_two", [](std::size_t, double) { return 2.0; });
  CHECK(has_confounder("plus_two"));
  CHECK_FALSE(has_confounder("nope"));
  auto custom = spec_of(2, 10, ConfounderKind::kCustom);
  custom.custom_tag = "nope";
  CHECK_THROWS_AS(custom.validate(), ConfigError);
  custom.custom_tag = "plus_two";
  CHECK_NOTHROW(custom.validate());
  CHECK(custom.confounder_label() == "plus_two");
  CHECK(custom.label() == "N2_d10_plus_two");
  CHECK(opt.label() == "N2_d10_III");
}

TEST_CASE("spec validation") {
  auto s = spec_of(2, 10);
  s.noise_variance = 0.0;
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = spec_of(1, 10);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = spec_of(2, 200);
  CHECK_THROWS_AS(s.validate(), ConfigError);
  s = spec_of(2, 3);
  s.fixed_mu = Vector{1, 2};
  CHECK_THROWS_AS(s.validate(), ConfigError);
}

TEST_CASE("rewards") {
  SUBCASE("noiseless linear") {
    auto s = spec_of(2, 2);
    s.noise_variance = 1e-12;
    s.fixed_mu = Vector{1, 0};
    s.context_mode = ContextMode::kSphere;
    Environment env(s, 4);
    RoundContext r;
    r.t = 1;
    r.contexts = {{1, 0}, {0, 1}};
    CHECK(env.realize_reward(r, 0) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(env.cumulative_regret() == 0.0);
    env.realize_reward(r, 1);
    CHECK(env.cumulative_regret() == 1.0);
  }
  SUBCASE("same seed same reward") {
    const auto s = spec_of(2, 10, ConfounderKind::kOscillating);
    Environment a(s, 9), b(s, 9);
    CHECK(a.mu() == b.mu());
    for (int i = 0; i < 10; ++i) {
      const auto ra = a.next_round();
      const auto rb = b.next_round();
      CHECK(ra.contexts == rb.contexts);
      CHECK(a.realize_reward(ra, 1) == b.realize_reward(rb, 1));
    }
  }
  SUBCASE("noise variance") {
    auto s = spec_of(2, 2);
    s.fixed_mu = Vector{0.3, -0.1};
    s.context_mode = ContextMode::kSphere;
    Environment env(s, 17);
    RoundContext r;
    r.t = 1;
    r.contexts = {{0.6, 0.8}, {0, 1}};
    const int n = 100000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i) {
      const double y = env.realize_reward(r, 0);
      sum += y;
      sq += y * y;
    }
    const double mean = sum / n;
    CHECK(std::abs((sq / n - mean * mean) / 0.12 - 1.0) < 0.05);
    CHECK(std::abs(mean - (0.6 * 0.3 - 0.8 * 0.1)) < 0.01);
  }
}

TEST_CASE("environment steps and regret") {
  const auto s = spec_of(3, 4, ConfounderKind::kOptimalScaled);
  Environment env(s, 1);
  double prev = 0.0;
  for (std::size_t t = 1; t <= 200; ++t) {
    const auto r = env.next_round();
    CHECK(r.t == t);
    CHECK(env.t() == t);
    env.realize_reward(r, t % 3);
    CHECK(env.cumulative_regret() >= prev);
    prev = env.cumulative_regret();
  }
}

TEST_CASE("confounder bound warning fires once per run") {
  WarningLog log;
  const auto s = spec_of(2, 10, ConfounderKind::kOscillating);
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    Environment env(s, seed, &log);
    for (int t = 0; t < 50; ++t) {
      const auto r = env.next_round();
      env.realize_reward(r, 1);
    }
  }
  CHECK(log.count("confounder-bound") == 1);
  std::size_t confounder_msgs = 0;
  for (const auto& m : log.messages()) confounder_msgs += m.find("confounder") != std::string::npos;
  CHECK(confounder_msgs == 1);

  WarningLog quiet;
  Environment env(spec_of(2, 10, ConfounderKind::kOptimalScaled), 1, &quiet);
  for (int t = 0; t < 50; ++t) {
    const auto r = env.next_round();
    env.realize_reward(r, 0);
  }
  CHECK(quiet.count("confounder-bound") == 0);
}
