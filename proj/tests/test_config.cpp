#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "adamlab/config.hpp"
#include "adamlab/csv.hpp"

using namespace adamlab;

namespace {

ExperimentConfig random_config(Rng& rng) {
    ExperimentConfig c;
    c.layouts = rng.uniform() < 0.5 ? std::vector<Layout>{Layout::Homogeneous}
                                    : std::vector<Layout>{Layout::Heterogeneous, Layout::Homogeneous};
    c.problem_seed = rng.next_u64();
    const int n_opt = static_cast<int>(rng.index(4));
    for (int i = 0; i < n_opt; ++i) {
        OptimizerConfig o = OptimizerConfig::adam(rng.uniform(0, 0.99), rng.uniform(0, 0.999));
        o.kind = static_cast<OptimizerKind>(rng.index(7));
        o.epsilon = rng.uniform(0, 1e-3);
        o.epsilon_placement = rng.uniform() < 0.5 ? EpsilonPlacement::InsideSqrt : EpsilonPlacement::OutsideSqrt;
        o.weight_decay = rng.uniform(0, 0.1);
        o.bias_correction = rng.uniform() < 0.5;
        o.init_mode = rng.uniform() < 0.5 ? InitMode::ZeroInit : InitMode::FirstSampleInit;
        if (rng.uniform() < 0.5) o.clip.gclip_threshold = rng.uniform(0.1, 10);
        if (rng.uniform() < 0.5) o.clip.cclip_bound = rng.uniform(0.1, 10);
        c.optimizers.push_back({"opt" + std::to_string(i), o});
    }
    c.beta = rng.uniform(0, 0.999);
    for (std::size_t i = 0, n = rng.index(5); i < n; ++i) c.lr_grid.push_back(std::ldexp(rng.uniform(), -static_cast<int>(i)));
    for (std::size_t i = 0, n = rng.index(5); i < n; ++i) c.seeds.push_back(rng.next_u64());
    c.steps = 1 + rng.index(5000);
    c.batch_size = 1 + rng.index(9);
    c.warmup_fraction = rng.uniform(0, 0.5);
    c.floor_lr = rng.uniform(0, 1e-4);
    c.eps_grid = {rng.uniform(0, 1e-6), rng.uniform(0, 1e-2)};
    c.sweep_kinds = {static_cast<OptimizerKind>(rng.index(7))};
    c.beta_base = rng.uniform(0.5, 0.99);
    c.kappas = {rng.uniform(0.01, 4)};
    c.equal_betas = rng.uniform() < 0.5;
    c.signal = {rng.normal(), rng.uniform(0.001, 1), rng.uniform(0, 0.01), 1 + rng.index(3000)};
    c.filters = {FilterKind{static_cast<FilterType>(rng.index(4)), rng.uniform(0, 0.99),
                            rng.uniform() < 0.5 ? InitMode::ZeroInit : InitMode::FirstSampleInit}};
    return c;
}

} // namespace

TEST_CASE("configs round-trip through JSON") {
    Rng rng(2718);
    for (int trial = 0; trial < 300; ++trial) {
        const ExperimentConfig c = random_config(rng);
        const std::string text = serialize_config(c);
        const ExperimentConfig back = parse_config(text);
        CHECK(back == c);
        CHECK(serialize_config(back) == text);
    }
    CHECK(parse_config(serialize_config(ExperimentConfig{})) == ExperimentConfig{});
}

TEST_CASE("defaults are filled by resolved()") {
    const ExperimentConfig r = ExperimentConfig{}.resolved();
    CHECK(r.optimizers.size() == 3);
    CHECK(r.optimizers[2].config.kind == OptimizerKind::AdamEqualBeta);
    CHECK(r.lr_grid.size() == 19);
    CHECK(r.lr_grid.front() == std::ldexp(1.0, -16));
    CHECK(r.lr_grid.back() == 4.0);
    CHECK(r.seeds.size() == 10);
    CHECK(r.kappas.size() == 8);
    CHECK(r.filters.size() == 4);
    CHECK_NOTHROW(r.validate());
}

TEST_CASE("malformed configs are rejected") {
    CHECK_THROWS_AS(parse_config("{"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"steps": 10})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 2})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "stepz": 10})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "steps": "many"})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"schema_version": 1, "layouts": ["round"]})"), ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({"schema_version": 1, "optimizers": [{"label": "x", "config": {"kind": "lion"}}]})"),
        ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({"schema_version": 1, "optimizers": [{"label": "x", "config": {"moment": 1}}]})"),
        ConfigError);

    ExperimentConfig bad;
    bad.batch_size = 10;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ExperimentConfig{};
    bad.lr_grid = {-1.0};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = ExperimentConfig{};
    bad.optimizers = {{"x", OptimizerConfig::adam_equal_beta(0.9)}};
    bad.optimizers[0].config.beta2 = 0.95;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("config files") {
    const auto dir = std::filesystem::temp_directory_path() / "adamlab_test_config";
    std::filesystem::create_directories(dir);
    ExperimentConfig c;
    c.steps = 17;
    save_config(c, dir / "c.json");
    CHECK(load_config(dir / "c.json") == c);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), IoError);
    CHECK_THROWS_AS(save_config(c, dir / "no_such_dir" / "c.json"), IoError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("csv formatting") {
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(std::nan("")) == "nan");
    for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -1e-17}) CHECK(std::stod(format_double(x)) == x);

    CsvTable t({"a", "b"});
    t.add_row({"1", "x"});
    t.add_row({"2", ""});
    CHECK(t.str() == "a,b\n1,x\n2,\n");
    CHECK_THROWS(t.add_row({"only one"}));
}
