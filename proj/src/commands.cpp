#include "adamlab/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "adamlab/equiv.hpp"
#include "adamlab/errors.hpp"
#include "adamlab/rng.hpp"
#include "adamlab/vi.hpp"

namespace adamlab {

using nlohmann::json;

namespace {

json check_entry(std::string name, double residual, double tolerance, bool passed) {
    return {{"name", std::move(name)}, {"residual", residual}, {"tolerance", tolerance}, {"passed", passed}};
}

struct SuiteOutput {
    json checks = json::array();
    bool passed = true;

    void add(std::string name, double residual, double tolerance, bool ok) {
        checks.push_back(check_entry(std::move(name), residual, tolerance, ok));
        passed = passed && ok;
    }
};

SuiteOutput verify_prop1(std::uint64_t seed) {
    SuiteOutput out;
    constexpr std::size_t kSequences = 50;
    constexpr std::size_t kLength = 1000;
    const double tol = default_prop1_tolerance(kLength);
    for (double beta : {0.8, 0.9, 0.95, 0.975, 0.9875}) {
        for (auto init : {InitMode::ZeroInit, InitMode::FirstSampleInit}) {
            double dir = 0.0, var = 0.0;
            bool ok = true;
            for (std::size_t s = 0; s < kSequences; ++s) {
                Rng rng(derive_seed(seed, "prop1", s));
                Vec g(kLength);
                for (auto& x : g) x = rng.normal();
                const auto r = check_prop1(g, beta, tol, init);
                dir = std::max(dir, r.direction.max_abs_residual);
                var = std::max(var, r.variance.max_abs_residual);
                ok = ok && r.passed();
            }
            const std::string tag = "beta=" + format_double(beta) + "/" + std::string(to_string(init));
            out.add(tag + "/direction", dir, tol, ok && dir <= tol);
            out.add(tag + "/variance", var, 1e-10, ok && var <= 1e-10);
        }
    }
    return out;
}

SuiteOutput verify_prop2() {
    SuiteOutput out;
    const Vec grid = beta_grid(0.9, default_kappas());
    for (double b1 : grid) {
        for (double b2 : grid) {
            const std::string tag = "beta1=" + format_double(b1) + ",beta2=" + format_double(b2);
            const double cond = prop2_condition(b1, b2);
            const auto sq = completing_square_check(b1, b2);
            if (b1 == b2) {
                out.add(tag + "/condition", cond, 0.0, cond == 0.0);
                out.add(tag + "/margin", sq.margin, 1e-12, sq.defined && sq.margin <= 1e-12);
            } else {
                // the square cannot close: the cleared margin must be strictly positive
                out.add(tag + "/cleared_margin", sq.cleared_margin, 0.0, sq.cleared_margin > 0.0);
                if (sq.defined) out.add(tag + "/margin", sq.margin, 0.0, sq.margin > 0.0);
            }
            out.add(tag + "/expansion", sq.expansion_residual, 1e-9,
                    !sq.defined || sq.expansion_residual <= 1e-9);
        }
    }
    return out;
}

SuiteOutput verify_vi(std::uint64_t seed) {
    SuiteOutput out;
    constexpr int kInstances = 20;
    constexpr int kCandidates = 1000;
    double param_gap = 0.0, value_gap = 0.0, beaten_by = 0.0;
    for (int i = 0; i < kInstances; ++i) {
        Rng rng(derive_seed(seed, "vi", static_cast<std::uint64_t>(i)));
        const GaussianBelief prior{2.0 * rng.normal(), std::exp(rng.uniform(-3.0, 3.0))};
        const double g = 3.0 * rng.normal();
        const double lambda = std::exp(rng.uniform(-2.0, 4.0));
        const auto closed = vi_update(prior, g, lambda);
        const auto oracle = vi_numeric_oracle(prior, g, lambda, 1e-10);
        const double f_closed = vi_objective(prior, closed, g, lambda);
        param_gap = std::max({param_gap, std::abs(closed.mean - oracle.mean),
                              std::abs(closed.variance - oracle.variance) / closed.variance});
        value_gap = std::max(value_gap, f_closed - vi_objective(prior, oracle, g, lambda));
        for (int c = 0; c < kCandidates; ++c) {
            const GaussianBelief cand{closed.mean + rng.normal() * std::sqrt(closed.variance),
                                      closed.variance * std::exp(rng.uniform(-2.0, 2.0))};
            beaten_by = std::max(beaten_by, f_closed - vi_objective(prior, cand, g, lambda));
        }
    }
    out.add("closed_vs_oracle/params", param_gap, 1e-4, param_gap <= 1e-4);
    out.add("closed_vs_oracle/objective", value_gap, 1e-8, value_gap <= 1e-8);
    out.add("random_candidates", beaten_by, 1e-8, beaten_by <= 1e-8);
    return out;
}

SuiteOutput verify_signal(std::uint64_t seed) {
    SuiteOutput out;
    for (auto t : {FilterType::AdamEqualBeta, FilterType::Sign, FilterType::Signum, FilterType::EmaSign}) {
        Rng rng(derive_seed(seed, "signal", static_cast<std::uint64_t>(t)));
        const auto report = check_properties(FilterKind{t, 0.95}, 100, 1e-12, rng);
        for (const auto& c : report.checks)
            out.add(std::string(to_string(t)) + "/" + c.name, c.max_violation, 1e-12, c.passed);
    }
    const auto blind = decay_blindness({FilterType::AdamEqualBeta, 0.95}, SignalSpec{});
    out.add("adam/decay_blindness", blind.max_gap, blind.tolerance, blind.passed);
    return out;
}

SuiteOutput verify_mollifier(std::uint64_t seed) {
    SuiteOutput out;
    Rng rng(derive_seed(seed, "mollifier", 0));
    double grid_gap = 0.0, radius_gap = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double m = std::exp(rng.uniform(-6.0, 6.0)) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
        const double var = std::exp(rng.uniform(-10.0, 10.0));
        const double d = mollified_direction(m, var);
        const double r = trust_radius(m, var);
        grid_gap = std::max(grid_gap, std::abs(grid_argmin_linear(m, r, 2001) - d));
        radius_gap = std::max(radius_gap, std::abs(sign(m) * r - d));
    }
    out.add("trust_region_argmin", grid_gap, 1e-12, grid_gap <= 1e-12);
    out.add("radius_times_sign", radius_gap, 1e-13, radius_gap <= 1e-13);
    return out;
}

void ensure_dir(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

TuneSettings tune_settings(const ExperimentConfig& c, unsigned jobs) {
    TuneSettings s;
    s.lr_grid = c.lr_grid;
    s.seeds = c.seeds;
    s.steps = c.steps;
    s.batch_size = c.batch_size;
    s.warmup_fraction = c.warmup_fraction;
    s.floor_lr = c.floor_lr;
    s.jobs = jobs;
    return s;
}

} // namespace

std::string_view to_string(Suite suite) {
    switch (suite) {
    case Suite::Prop1: return "prop1";
    case Suite::Prop2: return "prop2";
    case Suite::Vi: return "vi";
    case Suite::Signal: return "signal";
    case Suite::Mollifier: return "mollifier";
    case Suite::All: return "all";
    }
    return "?";
}

Suite parse_suite(std::string_view name) {
    for (auto s : {Suite::Prop1, Suite::Prop2, Suite::Vi, Suite::Signal, Suite::Mollifier, Suite::All})
        if (to_string(s) == name) return s;
    throw ConfigError("unknown suite '" + std::string(name) + "'");
}

VerifyResult run_verify(Suite suite, std::uint64_t seed) {
    VerifyResult result;
    result.report["seed"] = seed;
    result.report["suites"] = json::array();
    auto record = [&](Suite s, SuiteOutput out) {
        result.report["suites"].push_back(
            {{"name", to_string(s)}, {"passed", out.passed}, {"checks", std::move(out.checks)}});
        result.passed = result.passed && out.passed;
    };
    const bool all = suite == Suite::All;
    if (all || suite == Suite::Prop1) record(Suite::Prop1, verify_prop1(seed));
    if (all || suite == Suite::Prop2) record(Suite::Prop2, verify_prop2());
    if (all || suite == Suite::Vi) record(Suite::Vi, verify_vi(seed));
    if (all || suite == Suite::Signal) record(Suite::Signal, verify_signal(seed));
    if (all || suite == Suite::Mollifier) record(Suite::Mollifier, verify_mollifier(seed));
    result.report["passed"] = result.passed;
    return result;
}

OptimizerConfig select_optimizer(const ExperimentConfig& config, std::string_view name) {
    for (const auto& o : config.resolved().optimizers)
        if (o.label == name) return o.config;
    const double b = config.beta;
    switch (parse_optimizer_kind(name)) {
    case OptimizerKind::Sgd: return OptimizerConfig::sgd(b);
    case OptimizerKind::SignSgd: return OptimizerConfig::sign_sgd();
    case OptimizerKind::Signum: return OptimizerConfig::signum(b);
    case OptimizerKind::EmaSign: return OptimizerConfig::ema_sign(b);
    case OptimizerKind::RmsProp: return OptimizerConfig::rmsprop(b);
    case OptimizerKind::Adam: return OptimizerConfig::adam(b, b);
    case OptimizerKind::AdamEqualBeta: return OptimizerConfig::adam_equal_beta(b);
    }
    throw ConfigError("unknown optimizer '" + std::string(name) + "'");
}

QuadTables run_quad(const ExperimentConfig& config, unsigned jobs) {
    const ExperimentConfig c = config.resolved();
    c.validate();
    std::vector<Candidate> candidates;
    for (const auto& o : c.optimizers) candidates.push_back({o.label, o.config});
    const TuneSettings settings = tune_settings(c, jobs);

    QuadTables tables;
    for (Layout layout : c.layouts) {
        const auto problem = build_problem(BlockSpec::for_layout(layout), c.problem_seed);
        const auto summary = tune_and_compare(problem, candidates, settings);
        for (const auto& res : summary.results) {
            tables.summary.add_row({res.candidate.label, std::string(to_string(layout)), format_double(res.best_lr),
                                    format_double(res.best.median), format_double(res.best.q25),
                                    format_double(res.best.q75)});
            for (const auto& run : res.best_runs) {
                for (std::size_t k = 0; k < run.losses.size(); ++k) {
                    std::vector<std::string> row{run.config_id, std::to_string(run.seed), std::to_string(k + 1),
                                                 format_double(run.losses[k]), "", "", ""};
                    if (k < run.delta_block_means.size())
                        for (std::size_t b = 0; b < 3 && b < run.delta_block_means[k].size(); ++b)
                            row[4 + b] = format_double(run.delta_block_means[k][b]);
                    tables.runs.add_row(std::move(row));
                }
            }
        }
    }
    return tables;
}

void write_quad(const QuadTables& tables, const std::filesystem::path& out_dir) {
    ensure_dir(out_dir);
    tables.runs.write(out_dir / "runs.csv");
    tables.summary.write(out_dir / "summary.csv");
}

SignalTables run_signal(const ExperimentConfig& config, std::uint64_t seed) {
    const ExperimentConfig c = config.resolved();
    if (c.signal.length == 0) throw ConfigError("signal length must be positive");
    const Vec g = gen_signal(c.signal);

    SignalTables tables;
    for (std::size_t f = 0; f < c.filters.size(); ++f) {
        const FilterKind& kind = c.filters[f];
        const std::string name(to_string(kind.type));
        const std::string beta = format_double(kind.beta);
        const std::string init(to_string(kind.init_mode));
        const Vec d = filter_response(kind, g);
        for (std::size_t k = 0; k < g.size(); ++k)
            tables.response.add_row({name, beta, std::to_string(k), format_double(g[k]), format_double(d[k])});

        Rng rng(derive_seed(seed, "signal/" + name + "/" + beta + "/" + init, f));
        const auto report = check_properties(kind, 100, 1e-12, rng);
        for (const auto& chk : report.checks) {
            tables.properties.add_row(
                {name, beta, init, chk.name, format_double(chk.max_violation), chk.passed ? "true" : "false"});
            tables.passed = tables.passed && chk.passed;
        }
        // decay blindness is a property of the variance-normalized filter only
        if (kind.type == FilterType::AdamEqualBeta && c.signal.frequency > 0.0) {
            const auto blind = decay_blindness(kind, c.signal);
            tables.properties.add_row({name, beta, init, "decay_blind", format_double(blind.max_gap),
                                       blind.passed ? "true" : "false"});
            tables.passed = tables.passed && blind.passed;
        }
    }
    return tables;
}

void write_signal(const SignalTables& tables, const std::filesystem::path& out_dir) {
    ensure_dir(out_dir);
    tables.response.write(out_dir / "response.csv");
    tables.properties.write(out_dir / "properties.csv");
}

CsvTable run_sweep(const ExperimentConfig& config, Layout layout, unsigned jobs) {
    const ExperimentConfig c = config.resolved();
    c.validate();
    const Vec betas = beta_grid(c.beta_base, c.kappas);
    const TuneSettings settings = tune_settings(c, jobs);
    const auto problem = build_problem(BlockSpec::for_layout(layout), c.problem_seed);

    struct Cell {
        OptimizerConfig config;
        std::string beta1, beta2;
    };
    std::vector<Cell> cells;
    for (OptimizerKind kind : c.sweep_kinds) {
        switch (kind) {
        case OptimizerKind::SignSgd:
            cells.push_back({OptimizerConfig::sign_sgd(), "", ""});
            break;
        case OptimizerKind::Adam:
            for (double b1 : betas)
                for (double b2 : betas)
                    if (!c.equal_betas || b1 == b2)
                        cells.push_back({OptimizerConfig::adam(b1, b2), format_double(b1), format_double(b2)});
            break;
        case OptimizerKind::AdamEqualBeta:
            for (double b : betas)
                cells.push_back({OptimizerConfig::adam_equal_beta(b), format_double(b), format_double(b)});
            break;
        case OptimizerKind::RmsProp:
            for (double b : betas) cells.push_back({OptimizerConfig::rmsprop(b), "0", format_double(b)});
            break;
        default: {
            const OptimizerConfig base = select_optimizer(c, to_string(kind));
            for (double b : betas) {
                OptimizerConfig o = base;
                o.beta1 = b;
                cells.push_back({o, format_double(b), ""});
            }
        }
        }
    }

    CsvTable table({"optimizer", "layout", "beta1", "beta2", "lr", "median_final", "q25", "q75", "diverged_runs",
                    "status"});
    const std::string layout_name(to_string(layout));
    for (const auto& cell : cells) {
        const std::string name(to_string(cell.config.kind));
        const std::string label = name + "/b1=" + cell.beta1 + "/b2=" + cell.beta2;
        // one candidate at a time keeps only a single lr x seed block of traces alive
        try {
            const Candidate cand{label, cell.config};
            const auto summary = tune_and_compare(problem, std::span(&cand, 1), settings);
            for (const auto& lc : summary.results.front().cells) {
                const std::size_t div = lc.stats.diverged_runs;
                const char* status = div == 0 ? "ok" : div == settings.seeds.size() ? "diverged" : "partial_divergence";
                table.add_row({name, layout_name, cell.beta1, cell.beta2, format_double(lc.lr),
                               format_double(lc.stats.median), format_double(lc.stats.q25),
                               format_double(lc.stats.q75), std::to_string(div), status});
            }
        } catch (const std::exception&) {
            for (double lr : settings.lr_grid)
                table.add_row({name, layout_name, cell.beta1, cell.beta2, format_double(lr), "", "", "", "",
                               "error"});
        }
    }
    return table;
}

} // namespace adamlab
