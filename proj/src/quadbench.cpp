#include "adamlab/quadbench.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "adamlab/parallel.hpp"

namespace adamlab {

std::string_view to_string(Layout layout) {
    return layout == Layout::Heterogeneous ? "het" : "hom";
}

Layout parse_layout(std::string_view name) {
    if (name == "het" || name == "heterogeneous") return Layout::Heterogeneous;
    if (name == "hom" || name == "homogeneous") return Layout::Homogeneous;
    throw ConfigError("unknown layout '" + std::string(name) + "'");
}

BlockSpec BlockSpec::heterogeneous() {
    return {{{1, 2, 3}, {99, 100, 101}, {4998, 4999, 5000}}, Layout::Heterogeneous};
}

BlockSpec BlockSpec::homogeneous() {
    return {{{1, 99, 4998}, {2, 100, 4999}, {3, 101, 5000}}, Layout::Homogeneous};
}

BlockSpec BlockSpec::for_layout(Layout layout) {
    return layout == Layout::Heterogeneous ? heterogeneous() : homogeneous();
}

void BlockSpec::validate() const {
    if (blocks.empty()) throw ConfigError("block spec has no blocks");
    for (const auto& b : blocks)
        for (double ev : b)
            if (!(ev > 0.0) || !std::isfinite(ev))
                throw ConfigError("block eigenvalues must be positive and finite");
}

Eigen::Matrix3d rotation_from_gaussian(const Eigen::Matrix3d& a) {
    const Eigen::Matrix3d s = a * a.transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(s);
    // Eigen returns ascending eigenvalues; reverse to descending.
    Eigen::Matrix3d q;
    for (int c = 0; c < 3; ++c) q.col(c) = eig.eigenvectors().col(2 - c);
    for (int c = 0; c < 3; ++c) {
        Eigen::Index idx = 0;
        q.col(c).cwiseAbs().maxCoeff(&idx);
        if (q(idx, c) < 0.0) q.col(c) = -q.col(c);
    }
    return q;
}

Eigen::Matrix3d haar_rotation(Rng& rng) {
    for (;;) {
        Eigen::Matrix3d a;
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) a(r, c) = rng.normal();
        const Eigen::Matrix3d s = a * a.transpose();
        const Eigen::Vector3d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(s, Eigen::EigenvaluesOnly)
                                       .eigenvalues();
        const double scale = std::max(ev.cwiseAbs().maxCoeff(), 1.0);
        const double gap = std::min(ev(1) - ev(0), ev(2) - ev(1));
        if (gap > 1e-10 * scale) return rotation_from_gaussian(a);
    }
}

QuadraticProblem build_problem(const BlockSpec& spec, std::uint64_t seed) {
    spec.validate();
    QuadraticProblem p;
    p.spec = spec;
    p.seed = seed;
    const auto n = static_cast<Eigen::Index>(spec.dim());
    p.hessian = Eigen::MatrixXd::Zero(n, n);
    p.design = Eigen::MatrixXd::Zero(n, n);
    Rng rng(splitmix64(seed));
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
        const Eigen::Matrix3d q = haar_rotation(rng);
        const Eigen::Vector3d ev(spec.blocks[b][0], spec.blocks[b][1], spec.blocks[b][2]);
        const auto off = static_cast<Eigen::Index>(3 * b);
        // symmetrize so H == H^T holds bit for bit
        const Eigen::Matrix3d h = q * ev.asDiagonal() * q.transpose();
        const Eigen::Matrix3d x = q * ev.cwiseSqrt().asDiagonal() * q.transpose();
        p.hessian.block<3, 3>(off, off) = 0.5 * (h + h.transpose());
        p.design.block<3, 3>(off, off) = 0.5 * (x + x.transpose());
        p.block_rotations.push_back(q);
    }
    return p;
}

namespace {

Eigen::Map<const Eigen::VectorXd> as_eigen(std::span<const double> w) {
    return {w.data(), static_cast<Eigen::Index>(w.size())};
}

void check_dim(const QuadraticProblem& p, std::span<const double> w) {
    if (w.size() != p.dim())
        throw DimensionError("quadratic problem has dimension " + std::to_string(p.dim()) +
                             ", got vector of size " + std::to_string(w.size()));
}

} // namespace

double loss(const QuadraticProblem& problem, std::span<const double> w) {
    check_dim(problem, w);
    const auto x = as_eigen(w);
    return 0.5 * x.dot(problem.hessian * x);
}

Vec full_gradient(const QuadraticProblem& problem, std::span<const double> w) {
    check_dim(problem, w);
    const Eigen::VectorXd g = problem.hessian * as_eigen(w);
    return Vec(g.data(), g.data() + g.size());
}

Vec gradient_from_rows(const QuadraticProblem& problem, std::span<const double> w,
                       std::span<const std::size_t> rows) {
    check_dim(problem, w);
    if (rows.empty()) throw PreconditionError("gradient_from_rows: empty batch");
    const auto x = as_eigen(w);
    Eigen::VectorXd g = Eigen::VectorXd::Zero(x.size());
    for (std::size_t r : rows) {
        const auto row = problem.design.row(static_cast<Eigen::Index>(r));
        g += row.transpose() * row.dot(x);
    }
    g *= static_cast<double>(problem.dim()) / static_cast<double>(rows.size());
    return Vec(g.data(), g.data() + g.size());
}

Vec stochastic_grad(const QuadraticProblem& problem, std::span<const double> w,
                    std::size_t batch_size, Rng& rng) {
    const std::size_t n = problem.dim();
    if (batch_size < 1 || batch_size > n)
        throw PreconditionError("stochastic_grad: batch_size must lie in [1, " + std::to_string(n) + "]");
    // Partial Fisher-Yates shuffle.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < batch_size; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.index(n - i));
        std::swap(idx[i], idx[j]);
    }
    return gradient_from_rows(problem, w, std::span(idx).first(batch_size));
}

Vec default_w0(std::size_t dim, std::uint64_t seed) {
    Rng rng(splitmix64(seed ^ fnv1a64("w0")));
    Vec w(dim);
    for (auto& x : w) x = rng.normal();
    const double norm = l2_norm(w);
    for (auto& x : w) x *= 3.0 / norm;
    return w;
}

double RunRecord::final_loss() const {
    if (diverged || losses.empty()) return std::numeric_limits<double>::infinity();
    return losses.back();
}

RunRecord run_experiment(const QuadraticProblem& problem, const RunSpec& run,
                         std::span<const double> w0, std::uint64_t seed, std::string config_id) {
    check_dim(problem, w0);
    run.config.validate();
    Schedule sched = run.schedule;
    sched.total_steps = run.steps;
    sched.validate();

    RunRecord rec;
    rec.config_id = std::move(config_id);
    rec.seed = seed;
    rec.losses.reserve(run.steps);

    const bool track_delta = run.config.kind == OptimizerKind::Adam ||
                             run.config.kind == OptimizerKind::AdamEqualBeta;
    Rng rng(derive_seed(seed, rec.config_id, 0));
    OptimizerState state = init_state(run.config, problem.dim());
    Vec w(w0.begin(), w0.end());

    for (std::size_t k = 0; k < run.steps; ++k) {
        const Vec g = stochastic_grad(problem, w, run.batch_size, rng);
        const UpdateTrace trace = compute_update(run.config, state, g);
        w = apply_step(w, trace.direction, lr_at(sched, k), run.config.weight_decay);
        const double l = loss(problem, w);
        rec.losses.push_back(l);
        if (!std::isfinite(l) || l > kDivergenceThreshold) {
            rec.diverged = true;
            break;
        }
        if (track_delta) {
            Vec means(problem.num_blocks(), 0.0);
            for (std::size_t b = 0; b < means.size(); ++b)
                means[b] = (trace.delta_snapshot[3 * b] + trace.delta_snapshot[3 * b + 1] +
                            trace.delta_snapshot[3 * b + 2]) / 3.0;
            rec.delta_block_means.push_back(std::move(means));
        }
    }
    return rec;
}

std::vector<double> power_of_two_grid(int lo, int hi) {
    std::vector<double> grid;
    for (int e = lo; e <= hi; ++e) grid.push_back(std::ldexp(1.0, e));
    return grid;
}

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw PreconditionError("quantile of empty sample");
    std::sort(values.begin(), values.end());
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0 || values[lo] == values[hi]) return values[lo];
    return values[lo] + frac * (values[hi] - values[lo]);
}

FinalLossStats summarize_final_losses(std::span<const RunRecord> runs) {
    std::vector<double> finals;
    FinalLossStats s;
    for (const auto& r : runs) {
        finals.push_back(r.final_loss());
        if (r.diverged) ++s.diverged_runs;
    }
    s.median = quantile(finals, 0.5);
    s.q25 = quantile(finals, 0.25);
    s.q75 = quantile(finals, 0.75);
    return s;
}

const CandidateResult& ComparisonSummary::at(std::string_view label) const {
    for (const auto& r : results)
        if (r.candidate.label == label) return r;
    throw std::out_of_range("no candidate labelled '" + std::string(label) + "'");
}

namespace {

std::string lr_tag(double lr) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", lr);
    return buf;
}

} // namespace

ComparisonSummary tune_and_compare(const QuadraticProblem& problem,
                                   std::span<const Candidate> candidates,
                                   const TuneSettings& settings) {
    if (candidates.empty() || settings.lr_grid.empty() || settings.seeds.empty())
        throw ConfigError("tune_and_compare: candidates, lr grid and seeds must be nonempty");
    for (const auto& c : candidates) c.config.validate();

    const std::size_t n_lr = settings.lr_grid.size();
    const std::size_t n_seed = settings.seeds.size();
    const std::size_t total = candidates.size() * n_lr * n_seed;

    std::vector<Vec> w0s;
    for (auto seed : settings.seeds) w0s.push_back(default_w0(problem.dim(), seed));

    std::vector<RunRecord> records(total);
    parallel_for(total, settings.jobs, [&](std::size_t i) {
        const std::size_t s = i % n_seed;
        const std::size_t l = (i / n_seed) % n_lr;
        const std::size_t c = i / (n_seed * n_lr);
        RunSpec run;
        run.config = candidates[c].config;
        run.schedule.peak_lr = settings.lr_grid[l];
        run.schedule.floor_lr = settings.floor_lr;
        run.schedule.warmup_fraction = settings.warmup_fraction;
        run.steps = settings.steps;
        run.batch_size = settings.batch_size;
        const std::string id = std::string(to_string(problem.spec.layout)) + "/" +
                               candidates[c].label + "/lr=" + lr_tag(settings.lr_grid[l]);
        records[i] = run_experiment(problem, run, w0s[s], settings.seeds[s], id);
    });

    ComparisonSummary summary;
    summary.layout = problem.spec.layout;
    for (std::size_t c = 0; c < candidates.size(); ++c) {
        CandidateResult res;
        res.candidate = candidates[c];
        std::size_t best = 0;
        for (std::size_t l = 0; l < n_lr; ++l) {
            const auto first = records.begin() + static_cast<std::ptrdiff_t>((c * n_lr + l) * n_seed);
            const std::span<const RunRecord> runs(&*first, n_seed);
            res.cells.push_back({settings.lr_grid[l], summarize_final_losses(runs)});
            if (res.cells[l].stats.median < res.cells[best].stats.median) best = l;
        }
        res.best_lr = settings.lr_grid[best];
        res.best = res.cells[best].stats;
        res.all_diverged = std::all_of(res.cells.begin(), res.cells.end(), [&](const LrCell& cell) {
            return cell.stats.diverged_runs == n_seed;
        });
        const auto first = records.begin() + static_cast<std::ptrdiff_t>((c * n_lr + best) * n_seed);
        res.best_runs.assign(std::make_move_iterator(first),
                             std::make_move_iterator(first + static_cast<std::ptrdiff_t>(n_seed)));
        summary.results.push_back(std::move(res));
    }
    return summary;
}

std::vector<Candidate> epsilon_ablation_candidates(double beta, std::span<const double> eps_grid) {
    std::vector<Candidate> out;
    for (auto placement : {EpsilonPlacement::InsideSqrt, EpsilonPlacement::OutsideSqrt}) {
        for (double eps : eps_grid) {
            OptimizerConfig c = OptimizerConfig::signum(beta);
            c.epsilon = eps;
            c.epsilon_placement = placement;
            out.push_back({"signum_eps=" + lr_tag(eps) + "_" + std::string(to_string(placement)), c});
        }
    }
    out.push_back({"adam_equal_beta", OptimizerConfig::adam_equal_beta(beta)});
    return out;
}

EpsilonAblation signum_epsilon_ablation(const QuadraticProblem& problem, double beta,
                                        std::span<const double> eps_grid,
                                        const TuneSettings& settings) {
    const auto candidates = epsilon_ablation_candidates(beta, eps_grid);
    EpsilonAblation out;
    out.summary = tune_and_compare(problem, candidates, settings);
    out.best_signum_median = std::numeric_limits<double>::infinity();
    for (const auto& r : out.summary.results) {
        if (r.candidate.config.kind == OptimizerKind::Signum && r.best.median < out.best_signum_median) {
            out.best_signum_median = r.best.median;
            out.best_signum_label = r.candidate.label;
        }
    }
    out.adam_median = out.summary.at("adam_equal_beta").best.median;
    return out;
}

Vec time_averaged_block_deltas(const RunRecord& run) {
    if (run.delta_block_means.empty()) return {};
    Vec avg(run.delta_block_means.front().size(), 0.0);
    for (const auto& step : run.delta_block_means)
        for (std::size_t b = 0; b < avg.size(); ++b) avg[b] += step[b];
    for (auto& x : avg) x /= static_cast<double>(run.delta_block_means.size());
    return avg;
}

} // namespace adamlab
