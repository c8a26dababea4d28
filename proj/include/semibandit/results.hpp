#pragma once

// On-disk results of a sweep:
//
//   raw.csv      policy,setting,n_arms,dim,gamma_mult,rep,seed,t,cum_regret
//   agg.csv      policy,setting,gamma_mult,t,median,q1,q3
//   summary.csv  policy,n_arms,dim,setting,best_gamma,median_RT
//   run.json     config, replication seeds, code version, warnings
//   failures.json  cells that raised, with their error
//
// Reals use the shortest decimal form that reads back to the same double.

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "semibandit/envs.hpp"
#include "semibandit/harness.hpp"

namespace semibandit {

/// Unwritable output location or unreadable input file.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string format_double(double x);
double parse_double(const std::string& s);

/// Creates dir if needed and proves it accepts files; throws IoError.
void ensure_writable(const std::filesystem::path& dir);

void write_raw_csv(const std::filesystem::path& path, std::span<const RegretCurve> curves);
void write_agg_csv(const std::filesystem::path& path, std::span<const AggregateBand> bands);
void write_summary_csv(const std::filesystem::path& path, std::span<const AggregateBand> bands,
                       const ExperimentConfig& config);
void write_failures(const std::filesystem::path& path, std::span<const FailureRecord> failures);
void write_run_json(const std::filesystem::path& path, const ExperimentConfig& config, const SweepResult& result,
                    const WarningLog* log);

/// All of the files above into dir.
void write_results(const std::filesystem::path& dir, const SweepResult& result,
                   std::span<const AggregateBand> bands, const ExperimentConfig& config,
                   const WarningLog* log = nullptr);

std::vector<AggregateBand> read_agg_csv(const std::filesystem::path& path);

/// Self-contained SVG: per policy a solid median path and two dashed
/// quartile paths, axes and a legend. Deterministic for fixed input.
std::string render_svg(std::span<const AggregateBand> bands, const std::string& title);

/// One regret_<setting>.svg per setting using each policy's best-γ band.
/// Returns the written paths; throws std::invalid_argument on empty input.
std::vector<std::filesystem::path> render_figures(std::span<const AggregateBand> bands,
                                                  const std::filesystem::path& dir);

const char* code_version();

}  // namespace semibandit
