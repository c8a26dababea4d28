#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "semibandit/config.hpp"
#include "semibandit/results.hpp"

using namespace semibandit;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("semibandit_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t count_of(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

AggregateBand ramp(const std::string& policy, double slope) {
  AggregateBand b;
  b.policy = policy;
  b.setting = "N2_d10_II";
  b.gamma_mult = 0.1;
  for (std::size_t t = 1; t <= 50; t += 7) {
    b.steps.push_back(t);
    const double v = slope * std::sqrt(static_cast<double>(t));
    b.median.push_back(v);
    b.q1.push_back(0.8 * v);
    b.q3.push_back(1.3 * v);
  }
  return b;
}

ExperimentConfig tiny_config() {
  ExperimentConfig c;
  c.horizon = 25;
  c.n_reps = 3;
  c.gamma_grid = {0.1, 1.0};
  c.master_seed = 99;
  c.record_every = 10;
  c.policies = {{.name = "GBOSE", .kind = "gbose"}, {.name = "TS", .kind = "lints"}};
  EnvironmentSpec e;
  e.n_arms = 2;
  e.dim = 4;
  e.confounder = ConfounderKind::kOscillating;
  c.environments = {e};
  return c;
}

}  // namespace

TEST_CASE("shortest round-trip doubles") {
  for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.125, -2.5, 0.0, 5e-324}) {
    CHECK(parse_double(format_double(x)) == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(2.0) == "2");
  CHECK(format_double(1e21) == "1e+21");
}

TEST_CASE("csv outputs") {
  const auto config = tiny_config();
  const auto sweep = run_sweep_serial(config);
  const auto bands = aggregate_sweep(sweep, config);
  const fs::path dir = scratch("csv");
  ensure_writable(dir);
  write_results(dir, sweep, bands, config);

  const std::string raw = slurp(dir / "raw.csv");
  CHECK(raw.rfind("policy,setting,n_arms,dim,gamma_mult,rep,seed,t,cum_regret\n", 0) == 0);
  // 2 policies × 2 γ × 3 reps × steps {1, 10, 20, 25}
  CHECK(count_of(raw, "\n") == 1 + 2 * 2 * 3 * 4);

  const std::string summary = slurp(dir / "summary.csv");
  CHECK(summary.rfind("policy,n_arms,dim,setting,best_gamma,median_RT\n", 0) == 0);
  CHECK(count_of(summary, "\n") == 1 + config.policies.size() * config.environments.size());

  const auto back = read_agg_csv(dir / "agg.csv");
  REQUIRE(back.size() == bands.size());
  for (std::size_t i = 0; i < bands.size(); ++i) {
    CHECK(back[i].policy == bands[i].policy);
    CHECK(back[i].setting == bands[i].setting);
    CHECK(back[i].gamma_mult == bands[i].gamma_mult);
    CHECK(back[i].steps == bands[i].steps);
    CHECK(back[i].median == bands[i].median);
    CHECK(back[i].q1 == bands[i].q1);
    CHECK(back[i].q3 == bands[i].q3);
  }

  const auto run = nlohmann::json::parse(slurp(dir / "run.json"));
  CHECK(run.contains("code_version"));
  CHECK(run["config"]["horizon"] == 25);
  REQUIRE(run["replication_seeds"].size() == 3);
  CHECK(run["replication_seeds"][2]["seed"] == replication_seed(99, 0, 2));
  CHECK(nlohmann::json::parse(slurp(dir / "failures.json")).empty());
  CHECK_FALSE(fs::exists(dir / ".write_probe"));
  fs::remove_all(dir);
}

TEST_CASE("unwritable output") {
  const fs::path file = scratch("not_a_dir");
  { std::ofstream(file) << "x"; }
  CHECK_THROWS_AS(ensure_writable(file / "sub"), IoError);
  fs::remove(file);
  CHECK_THROWS_AS(read_agg_csv(scratch("missing") / "agg.csv"), IoError);
}

TEST_CASE("svg structure") {
  const std::vector<AggregateBand> bands{ramp("GBOSE", 2.0), ramp("TS", 3.0)};
  const std::string svg = render_svg(bands, "N2_d10_II");
  CHECK(count_of(svg, "<path") == 6);
  CHECK(count_of(svg, "stroke-dasharray") == 4);
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("class=\"legend\"") != std::string::npos);
  CHECK(svg.find("class=\"axes\"") != std::string::npos);
  CHECK(svg.find("href") == std::string::npos);
  CHECK(render_svg(bands, "N2_d10_II") == svg);
}

TEST_CASE("svg median path rises on screen for growing regret") {
  const std::vector<AggregateBand> bands{ramp("GBOSE", 2.0)};
  const std::string svg = render_svg(bands, "x");
  const std::regex median_path("class=\"median\"[^>]* d=\"([^\"]+)\"");
  std::smatch m;
  REQUIRE(std::regex_search(svg, m, median_path));
  const std::string d = m[1];
  const std::regex point("[ML]([-0-9.]+),([-0-9.]+)");
  std::vector<double> xs, ys;
  for (auto it = std::sregex_iterator(d.begin(), d.end(), point); it != std::sregex_iterator(); ++it) {
    xs.push_back(std::stod((*it)[1]));
    ys.push_back(std::stod((*it)[2]));
  }
  REQUIRE(ys.size() == bands[0].steps.size());
  for (std::size_t i = 1; i < ys.size(); ++i) {
    CHECK(xs[i] > xs[i - 1]);
    CHECK(ys[i] < ys[i - 1]);
  }
}

TEST_CASE("figures per setting") {
  auto a = ramp("GBOSE", 2.0);
  auto b = ramp("TS", 3.0);
  auto c = ramp("GBOSE", 1.0);
  c.setting = "N10_d2_I";
  const fs::path dir = scratch("fig");
  const auto written = render_figures(std::vector<AggregateBand>{a, b, c}, dir);
  CHECK(written.size() == 2);
  CHECK(fs::exists(dir / "regret_N2_d10_II.svg"));
  CHECK(fs::exists(dir / "regret_N10_d2_I.svg"));
  CHECK_THROWS(render_figures(std::vector<AggregateBand>{}, dir));
  fs::remove_all(dir);
}

TEST_CASE("config json") {
  const auto paper = paper_config();
  CHECK(paper.policies.size() == 4);
  CHECK(paper.environments.size() == 9);
  CHECK(paper.gamma_grid.size() == 11);
  CHECK(paper.horizon == 20000);
  CHECK(paper.n_reps == 10);
  CHECK(enumerate_cells(paper).size() == 4 * 9 * 11 * 10);
  for (const auto& e : paper.environments) {
    CHECK_NOTHROW(e.validate());
    if (e.n_arms == 2) CHECK(e.context_mode == ContextMode::kBlock);
    if (e.n_arms == 10) CHECK(e.context_mode == ContextMode::kSphere);
  }

  const auto doc = config_to_json(paper);
  const auto back = config_from_json(doc);
  CHECK(config_to_json(back) == doc);

  auto typo = doc;
  typo["horizn"] = 5;
  CHECK_THROWS_AS(config_from_json(typo), ConfigError);
  auto bad_policy = doc;
  bad_policy["policies"][0]["delta"] = 2.0;
  CHECK_THROWS_AS(config_from_json(bad_policy), ConfigError);
  auto bad_env = doc;
  bad_env["environments"][0]["confounder"] = "IV";
  CHECK_THROWS_AS(config_from_json(bad_env), ConfigError);
  auto wrong_type = doc;
  wrong_type["horizon"] = "long";
  CHECK_THROWS_AS(config_from_json(wrong_type), ConfigError);

  const fs::path missing = scratch("nope.json");
  CHECK_THROWS_AS(load_config(missing), ConfigError);
  { std::ofstream(missing) << "{ not json"; }
  CHECK_THROWS_AS(load_config(missing), ConfigError);
  fs::remove(missing);
}
