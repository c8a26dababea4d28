// semibandit: run semiparametric bandit sweeps, re-render figures, check configs.
//
//   semibandit run --config PATH [--out DIR] [--seed U64] [--parallelism K] [--horizon T]
//   semibandit paper [--out DIR] [--seed U64] [--parallelism K] [--horizon T] [--dump-config]
//   semibandit plot --agg PATH [--out DIR]
//   semibandit validate --config PATH
//
// Exit status: 0 success, 1 configuration error, 2 runtime failure.

#include <chrono>
#include <cstdlib>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "semibandit/config.hpp"
#include "semibandit/harness.hpp"
#include "semibandit/results.hpp"

namespace fs = std::filesystem;
using namespace semibandit;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

struct Overrides {
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> parallelism;
  std::optional<std::size_t> horizon;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--out", o.out, "Output directory (falls back to output_dir, then $SEMIBANDIT_OUT)");
  cmd->add_option("--seed", o.seed, "Master seed");
  cmd->add_option("--parallelism", o.parallelism, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--horizon", o.horizon, "Rounds per replication")->check(CLI::PositiveNumber);
}

fs::path resolve_out(const std::string& flag, const std::string& configured) {
  if (!flag.empty()) return flag;
  if (!configured.empty()) return configured;
  if (const char* env = std::getenv("SEMIBANDIT_OUT"); env && *env) return env;
  return "results";
}

int execute(ExperimentConfig config, const Overrides& o) {
  if (o.seed) config.master_seed = *o.seed;
  if (o.parallelism) config.parallelism = *o.parallelism;
  if (o.horizon) config.horizon = *o.horizon;
  config.validate();
  const fs::path out = resolve_out(o.out, config.output_dir);
  config.output_dir = out.string();
  ensure_writable(out);

  const std::size_t cells = enumerate_cells(config).size();
  std::cerr << "running " << cells << " episodes (T=" << config.horizon << ") on " << config.parallelism
            << " thread(s) into " << out << '\n';
  const auto start = std::chrono::steady_clock::now();

  WarningLog log(/*echo=*/true);
  const SweepResult result = run_sweep(config, &log);
  const auto bands = aggregate_sweep(result, config, &log);
  write_results(out, result, bands, config, &log);
  if (!bands.empty()) render_figures(bands, out);

  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "done in " << secs << " s: " << result.curves.size() << " curves, " << result.failures.size()
            << " failures\n";
  for (const auto& b : best_bands(bands)) {
    std::cout << b.setting << '\t' << b.policy << "\tbest_gamma=" << format_double(b.gamma_mult)
              << "\tmedian_RT=" << b.median.back() << '\n';
  }
  if (!result.failures.empty()) {
    std::cerr << "failures recorded in " << (out / "failures.json") << '\n';
    return kRuntimeError;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiparametric contextual bandit simulations"};
  app.require_subcommand(1);

  Overrides run_o, paper_o;
  std::string run_config, validate_config, agg_path, plot_out;
  bool dump_config = false;

  auto* run = app.add_subcommand("run", "Execute the sweep described by a config file");
  run->add_option("--config", run_config, "Config file (JSON)")->required();
  add_override_flags(run, run_o);

  auto* paper = app.add_subcommand("paper", "Run the built-in 3 setups x 3 confounders sweep");
  add_override_flags(paper, paper_o);
  paper->add_flag("--dump-config", dump_config, "Print the built-in config as JSON and exit");

  auto* plot = app.add_subcommand("plot", "Re-render figures from an agg.csv");
  plot->add_option("--agg", agg_path, "Aggregated CSV")->required();
  plot->add_option("--out", plot_out, "Directory for the SVG files (default: next to agg.csv)");

  auto* validate = app.add_subcommand("validate", "Parse and check a config without running it");
  validate->add_option("--config", validate_config, "Config file (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kConfigError;
  }

  try {
    if (*run) return execute(load_config(run_config), run_o);
    if (*paper) {
      if (dump_config) {
        std::cout << config_to_json(paper_config()).dump(2) << '\n';
        return kOk;
      }
      return execute(paper_config(), paper_o);
    }
    if (*validate) {
      const auto config = load_config(validate_config);
      std::cout << "ok: " << config.policies.size() << " policies x " << config.environments.size()
                << " environments x " << config.gamma_grid.size() << " gamma values x " << config.n_reps
                << " replications = " << enumerate_cells(config).size() << " episodes\n";
      return kOk;
    }
    if (*plot) {
      const auto bands = read_agg_csv(agg_path);
      const fs::path out = plot_out.empty() ? fs::path(agg_path).parent_path() : fs::path(plot_out);
      for (const auto& p : render_figures(bands, out.empty() ? fs::path(".") : out)) std::cout << p.string() << '\n';
      return kOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kOk;
}
