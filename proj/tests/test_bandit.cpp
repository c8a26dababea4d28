#include "doctest.h"
#include "semibandit/bandit.hpp"

using namespace semibandit;

namespace {

RoundContext make_round(std::vector<Vector> ctx) {
  RoundContext r;
  r.contexts = std::move(ctx);
  return r;
}

}  // namespace

TEST_CASE("instant regret") {
  const Vector mu{1.0, 0.0};
  const auto round = make_round({{1, 0}, {0, 1}});
  CHECK(instant_regret(mu, round, 0) == 0.0);
  CHECK(instant_regret(mu, round, 1) == 1.0);

  // <mu, b_i> = {0.3, -0.4, -0.3}; max - chosen = 0.3 - (-0.3)
  const Vector mu2{0.3, -0.4};
  const auto round3 = make_round({{1, 0}, {0, 1}, {-1, 0}});
  const double scores[] = {0.3, -0.4, -0.3};
  CHECK(instant_regret(mu2, round3, 2) == doctest::Approx(scores[0] - scores[2]));
  CHECK(instant_regret(mu2, round3, 2) == doctest::Approx(0.6));
  CHECK_THROWS(instant_regret(mu2, round3, 3));
}

TEST_CASE("optimal arm") {
  CHECK(optimal_arm(Vector{1, 0}, make_round({{1, 0}, {0, 1}})) == 0);
  CHECK(optimal_arm(Vector{0, 0}, make_round({{1, 0}, {0, 1}, {0.2, 0.3}})) == 0);
  // inner products {0.5, 0.5, 0.6}
  CHECK(optimal_arm(Vector{0.5, 0.5}, make_round({{1, 0}, {0, 1}, {0.6, 0.6}})) == 2);
}

TEST_CASE("optimal arm is scale invariant") {
  Rng rng(9);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Vector> ctx(5, Vector(3));
    for (auto& b : ctx)
      for (auto& v : b) v = rng.normal();
    Vector mu(3);
    for (auto& v : mu) v = rng.normal();
    const auto round = make_round(ctx);
    const std::size_t a = optimal_arm(mu, round);
    for (double c : {0.01, 3.0, 1e3}) {
      Vector scaled = mu;
      for (auto& v : scaled) v *= c;
      CHECK(optimal_arm(scaled, round) == a);
    }
  }
}

TEST_CASE("round validation") {
  CHECK_THROWS_AS(validate_round(make_round({{1, 0}})), std::invalid_argument);
  CHECK_THROWS_AS(validate_round(make_round({{1, 0}, {1, 0, 0}})), std::invalid_argument);
  CHECK_NOTHROW(validate_round(make_round({{1, 0}, {0, 1}})));
  CHECK(contexts_within_unit_ball(make_round({{1, 0}, {0.6, 0.8}})));
  CHECK_FALSE(contexts_within_unit_ball(make_round({{1, 0}, {1, 1}})));
}

TEST_CASE("decision checks") {
  const auto round = make_round({{1, 0}, {-1, 0}, {0, 1}});
  Decision d;
  d.chosen_arm = 0;
  d.arm_distribution = {0.5, 0.5, 0.0};
  d.centered_mean = {0.0, 0.0};
  d.surviving_set = {0, 1};
  CHECK(check_decision(d, round).empty());

  Decision sum = d;
  sum.arm_distribution = {0.5, 0.4, 0.0};
  CHECK_FALSE(check_decision(sum, round).empty());

  Decision support = d;
  support.surviving_set = {0};
  CHECK_FALSE(check_decision(support, round).empty());

  Decision mean = d;
  mean.centered_mean = {0.1, 0.0};
  CHECK_FALSE(check_decision(mean, round).empty());

  Decision chosen = d;
  chosen.chosen_arm = 2;
  CHECK_FALSE(check_decision(chosen, round).empty());

  d.diagnostics = {{"x", 2.5}};
  CHECK(d.diagnostic("x") == 2.5);
  CHECK(d.diagnostic("y", -1.0) == -1.0);
}

TEST_CASE("argmax ties go to the lowest index") {
  CHECK(argmax_lowest(Vector{1, 3, 3, 2}) == 1);
  CHECK(argmax_lowest(Vector{0, 0, 0}) == 0);
}
