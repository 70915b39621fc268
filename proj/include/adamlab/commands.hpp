#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "adamlab/config.hpp"
#include "adamlab/csv.hpp"

namespace adamlab {

// Subcommand bodies, kept out of the executable so they can be driven in-process.

enum class Suite { Prop1, Prop2, Vi, Signal, Mollifier, All };

std::string_view to_string(Suite suite);
Suite parse_suite(std::string_view name);

struct VerifyResult {
    nlohmann::json report;
    bool passed = true;
};

VerifyResult run_verify(Suite suite, std::uint64_t seed);

// Picks the optimizer named `name` from the config (by label first, then by
// kind name at the config's beta).
OptimizerConfig select_optimizer(const ExperimentConfig& config, std::string_view name);

struct QuadTables {
    CsvTable runs{{"config_id", "seed", "step", "loss", "delta_b1", "delta_b2", "delta_b3"}};
    CsvTable summary{{"optimizer", "layout", "best_lr", "median_final", "q25", "q75"}};
};

// Tunes every optimizer over the lr grid on each layout; runs.csv holds the
// per-step traces of the best learning rate only.
QuadTables run_quad(const ExperimentConfig& config, unsigned jobs);
void write_quad(const QuadTables& tables, const std::filesystem::path& out_dir);

struct SignalTables {
    CsvTable response{{"filter", "beta", "k", "g", "d"}};
    CsvTable properties{{"filter", "beta", "init", "property", "max_violation", "passed"}};
    bool passed = true;
};

SignalTables run_signal(const ExperimentConfig& config, std::uint64_t seed);
void write_signal(const SignalTables& tables, const std::filesystem::path& out_dir);

// One row per (optimizer kind, beta pair, lr) cell on the given layout. A cell
// whose configuration is rejected is flagged and the sweep moves on.
CsvTable run_sweep(const ExperimentConfig& config, Layout layout, unsigned jobs);

} // namespace adamlab
