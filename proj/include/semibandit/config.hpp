#pragma once

// ExperimentConfig <-> JSON. Unknown keys are rejected so typos surface as
// configuration errors instead of silently falling back to defaults.

#include <filesystem>
#include <string>

#include "json.hpp"
#include "semibandit/harness.hpp"

namespace semibandit {

ExperimentConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const ExperimentConfig& config);

/// Reads and parses a config file; throws ConfigError on any problem.
ExperimentConfig load_config(const std::filesystem::path& path);

/// The three (N, d) setups × three confounders with TS, Semi TS, Action TS
/// and GBOSE over the default 11-point grid, T = 20000, 10 replications.
ExperimentConfig paper_config();

}  // namespace semibandit
