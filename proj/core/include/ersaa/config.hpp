#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ersaa/datagen.hpp"
#include "ersaa/harness.hpp"
#include "ersaa/residuals.hpp"
#include "ersaa/stochprog.hpp"

namespace ersaa::config {

/// "generate" section: sample size, seed, and output path for a dataset.
struct GenerateSection {
    std::size_t n = 0;
    std::uint64_t seed = 1;
    std::string output;
};

/// "experiment" section: Monte Carlo grid and output prefix.
struct ExperimentSection {
    std::vector<std::size_t> n_grid;
    std::size_t replications = 30;
    std::uint64_t base_seed = 1;
    std::size_t m_oracle = 100000;
    std::uint64_t oracle_seed = 0x0eac1eULL;
    std::vector<double> tail_thresholds;
    std::string output_prefix;
};

/**
 * Parsed CLI configuration file. Sections are optional; each subcommand
 * checks for the ones it needs. Unknown keys anywhere are rejected.
 */
struct CliConfig {
    std::optional<datagen::TruthSpec> truth;
    std::optional<stochprog::Problem> problem;
    std::optional<residuals::SupportBox> support; // set iff problem is set
    harness::EstimatorSpec estimators;
    std::vector<double> query_x;
    std::optional<double> dro_radius;
    std::optional<GenerateSection> generate;
    std::optional<ExperimentSection> experiment;
};

CliConfig config_from_json(const std::string& text);
CliConfig load_config(const std::string& path);

/// Assembles the harness configuration; throws ConfigError when the truth,
/// problem, query_x, or experiment section is missing.
harness::ExperimentConfig make_experiment_config(const CliConfig& cli);

} // namespace ersaa::config
