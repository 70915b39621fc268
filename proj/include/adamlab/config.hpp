#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "adamlab/core.hpp"
#include "adamlab/optim.hpp"
#include "adamlab/quadbench.hpp"
#include "adamlab/signal.hpp"

namespace adamlab {

inline constexpr int kConfigSchemaVersion = 1;

struct LabelledOptimizer {
    std::string label;
    OptimizerConfig config;
    bool operator==(const LabelledOptimizer&) const = default;
};

/// Everything the CLI subcommands read from a config file. Serialized as
/// JSON with an explicit schema_version; unknown keys are rejected.
struct ExperimentConfig {
    int schema_version = kConfigSchemaVersion;

    // quadratic benchmark
    std::vector<Layout> layouts{Layout::Heterogeneous, Layout::Homogeneous};
    std::uint64_t problem_seed = 0;
    std::vector<LabelledOptimizer> optimizers; // empty -> sgd, signum, adam_equal_beta at beta
    double beta = 0.95;
    std::vector<double> lr_grid = power_of_two_grid(-16, 2);
    std::vector<std::uint64_t> seeds{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::size_t steps = 1000;
    std::size_t batch_size = 3;
    double warmup_fraction = 0.1;
    double floor_lr = 0.0;
    std::vector<double> eps_grid{1e-9, 1e-6, 1e-3};

    // sweep
    std::vector<OptimizerKind> sweep_kinds{OptimizerKind::Sgd, OptimizerKind::Signum,
                                           OptimizerKind::Adam};
    double beta_base = 0.9;
    std::vector<double> kappas; // empty -> 2^-5 .. 2^2
    bool equal_betas = false;

    // signal lab
    SignalSpec signal;
    std::vector<FilterKind> filters; // empty -> sign, adam, signum, emasign at beta

    bool operator==(const ExperimentConfig&) const = default;

    // Fills the documented defaults for empty optimizer, kappa and filter lists.
    ExperimentConfig resolved() const;
    void validate() const;
};

std::vector<LabelledOptimizer> default_quad_optimizers(double beta);

nlohmann::json to_json(const OptimizerConfig& c);
OptimizerConfig optimizer_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig config_from_json(const nlohmann::json& j);

std::string serialize_config(const ExperimentConfig& c);
ExperimentConfig parse_config(const std::string& text);

// Throws IoError with the path on failure.
ExperimentConfig load_config(const std::filesystem::path& path);
void save_config(const ExperimentConfig& c, const std::filesystem::path& path);

} // namespace adamlab
