#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "semibandit/config.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = SEMIBANDIT_CLI;

int run(const std::string& args) {
  const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("semibandit_cli_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

// A two-policy, two-setting config that runs in well under a second.
fs::path write_small_config(const fs::path& dir) {
  auto c = semibandit::paper_config();
  c.policies.resize(2);
  c.environments = {c.environments[1], c.environments[4]};
  c.gamma_grid = {0.1, 1.0};
  c.n_reps = 3;
  c.horizon = 500;
  c.record_every = 50;
  c.notes.clear();
  const fs::path path = dir / "small.json";
  std::ofstream(path) << semibandit::config_to_json(c).dump(2);
  return path;
}

}  // namespace

TEST_CASE("validate") {
  const fs::path dir = scratch("validate");
  CHECK(run("validate --config " + std::string(SHIPPED_PAPER_CONFIG)) == 0);
  CHECK(run("validate --config " + write_small_config(dir).string()) == 0);
  std::ofstream(dir / "broken.json") << R"({"horizon": 10, "policies": [], "environments": []})";
  CHECK(run("validate --config " + (dir / "broken.json").string()) == 1);
  CHECK(run("validate --config " + (dir / "absent.json").string()) == 1);
  fs::remove_all(dir);
}

TEST_CASE("usage errors exit 1") {
  CHECK(run("run --config x.json --frobnicate") == 1);
  CHECK(run("") == 1);
  CHECK(run("run") == 1);
  CHECK(run("run --config x.json --parallelism 0") == 1);
  CHECK(run("--help") == 0);
}

TEST_CASE("shipped paper config matches the built-in one") {
  const auto shipped = nlohmann::json::parse(slurp(SHIPPED_PAPER_CONFIG));
  CHECK(shipped == semibandit::config_to_json(semibandit::paper_config()));
}

TEST_CASE("run is deterministic across parallelism and plot is idempotent") {
  const fs::path dir = scratch("run");
  const std::string cfg = write_small_config(dir).string();
  REQUIRE(run("run --config " + cfg + " --horizon 100 --parallelism 4 --seed 7 --out " + (dir / "p4").string()) == 0);
  REQUIRE(run("run --config " + cfg + " --horizon 100 --parallelism 1 --seed 7 --out " + (dir / "p1").string()) == 0);
  for (const char* f : {"raw.csv", "agg.csv", "summary.csv"}) {
    CHECK(slurp(dir / "p4" / f) == slurp(dir / "p1" / f));
  }
  const auto meta = nlohmann::json::parse(slurp(dir / "p1" / "run.json"));
  CHECK(meta["config"]["horizon"] == 100);
  CHECK(meta["config"]["master_seed"] == 7);

  std::vector<fs::path> svgs;
  for (const auto& e : fs::directory_iterator(dir / "p1"))
    if (e.path().extension() == ".svg") svgs.push_back(e.path());
  CHECK(svgs.size() == 2);

  REQUIRE(run("plot --agg " + (dir / "p1" / "agg.csv").string() + " --out " + (dir / "replot").string()) == 0);
  for (const auto& s : svgs) CHECK(slurp(s) == slurp(dir / "replot" / s.filename()));
  fs::remove_all(dir);
}

TEST_CASE("output directory falls back to the environment variable") {
  const fs::path dir = scratch("envout");
  const std::string cfg = write_small_config(dir).string();
  const std::string cmd = "SEMIBANDIT_OUT=" + (dir / "from_env").string() + " " + kCli + " run --config " + cfg +
                          " --horizon 20 >/dev/null 2>&1";
  CHECK(std::system(cmd.c_str()) == 0);
  CHECK(fs::exists(dir / "from_env" / "raw.csv"));
  fs::remove_all(dir);
}

TEST_CASE("unwritable output is a configuration error") {
  const fs::path dir = scratch("unwritable");
  const std::string cfg = write_small_config(dir).string();
  std::ofstream(dir / "file") << "x";
  CHECK(run("run --config " + cfg + " --horizon 20 --out " + (dir / "file" / "sub").string()) == 1);
  fs::remove_all(dir);
}
