// adamlab: verification suites, quadratic benchmarks, filter analysis and sweeps.

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "adamlab/commands.hpp"
#include "adamlab/config.hpp"
#include "adamlab/errors.hpp"

namespace {

const std::map<std::string, std::string> kLayoutNames{
    {"het", "het"}, {"hom", "hom"}, {"heterogeneous", "het"}, {"homogeneous", "hom"}};

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;
constexpr int kIo = 3;

unsigned default_jobs() {
    if (const char* env = std::getenv("ADAMLAB_JOBS")) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
        std::cerr << "warning: ignoring invalid ADAMLAB_JOBS='" << env << "'\n";
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace

int main(int argc, char** argv) {
    using namespace adamlab;

    CLI::App app{"Adam/Signum/variance-form optimizer lab"};
    app.require_subcommand(1);
    app.fallthrough(); // global options may follow the subcommand

    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    unsigned jobs = default_jobs();
    app.add_option("--config", config_path, "JSON experiment config");
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "base seed (problem seed for quad/sweep, check seed for verify/signal)");
    app.add_option("--jobs", jobs, "worker threads (default: $ADAMLAB_JOBS or all cores)")
        ->check(CLI::PositiveNumber);

    auto* verify = app.add_subcommand("verify", "run identity and property suites, print a JSON report");
    std::string suite = "all";
    verify->add_option("--suite", suite, "prop1, prop2, vi, signal, mollifier or all")
        ->check(CLI::IsMember({"prop1", "prop2", "vi", "signal", "mollifier", "all"}));

    std::optional<std::string> layout;
    auto* quad = app.add_subcommand("quad", "tune optimizers on the 9-d quadratics, write runs.csv and summary.csv");
    quad->add_option("--layout", layout, "het or hom (default: both)")
        ->transform(CLI::CheckedTransformer(kLayoutNames));
    std::vector<std::string> optims;
    quad->add_option("--optim", optims, "restrict to these optimizers (label or kind)");
    std::vector<double> lrs;
    quad->add_option("--lr", lrs, "learning rates replacing the grid");

    auto* signal = app.add_subcommand("signal", "filter responses and property checks on a damped sine");
    std::vector<std::string> filters;
    signal->add_option("--filter", filters, "sign, adam, signum or emasign")
        ->check(CLI::IsMember({"sign", "adam", "signum", "emasign"}));
    std::optional<double> decay;
    signal->add_option("--decay", decay, "signal decay rate");
    std::optional<double> beta;
    signal->add_option("--beta", beta, "filter beta");

    auto* sweep = app.add_subcommand("sweep", "lr x beta grid on one layout, one summary row per cell");
    std::string sweep_layout = "het";
    sweep->add_option("--layout", sweep_layout, "het or hom")->transform(CLI::CheckedTransformer(kLayoutNames));
    bool equal_betas = false;
    sweep->add_flag("--equal-betas", equal_betas, "restrict (beta1, beta2) to the diagonal");
    std::vector<double> sweep_lrs;
    sweep->add_option("--lr", sweep_lrs, "learning rates replacing the grid");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);

        if (verify->parsed()) {
            const auto result = run_verify(parse_suite(suite), seed.value_or(0));
            std::cout << result.report.dump(2) << "\n";
            return result.passed ? kOk : kCheckFailed;
        }

        if (quad->parsed()) {
            if (seed) config.problem_seed = *seed;
            if (layout) config.layouts = {parse_layout(*layout)};
            if (!optims.empty()) {
                std::vector<LabelledOptimizer> chosen;
                for (const auto& name : optims) chosen.push_back({name, select_optimizer(config, name)});
                config.optimizers = chosen;
            }
            if (!lrs.empty()) config.lr_grid = lrs;
            write_quad(run_quad(config, jobs), out_dir);
            return kOk;
        }

        if (signal->parsed()) {
            if (decay) config.signal.decay = *decay;
            if (beta) config.beta = *beta;
            if (!filters.empty()) {
                config.filters.clear();
                for (const auto& f : filters) config.filters.push_back({parse_filter_type(f), config.beta});
            } else if (beta) {
                config.filters.clear();
            }
            const auto tables = run_signal(config, seed.value_or(0));
            write_signal(tables, out_dir);
            return tables.passed ? kOk : kCheckFailed;
        }

        if (sweep->parsed()) {
            if (seed) config.problem_seed = *seed;
            if (equal_betas) config.equal_betas = true;
            if (!sweep_lrs.empty()) config.lr_grid = sweep_lrs;
            const CsvTable table = run_sweep(config, parse_layout(sweep_layout), jobs);
            std::filesystem::create_directories(out_dir);
            table.write(std::filesystem::path(out_dir) / "sweep.csv");
            return kOk;
        }
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kIo;
    } catch (const std::invalid_argument& e) {
        // ConfigError, PreconditionError and DimensionError all land here
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kCheckFailed;
    }
    return kUsage;
}
