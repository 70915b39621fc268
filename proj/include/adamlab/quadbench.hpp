#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "adamlab/core.hpp"
#include "adamlab/optim.hpp"
#include "adamlab/rng.hpp"

namespace adamlab {

enum class Layout { Heterogeneous, Homogeneous };

std::string_view to_string(Layout layout);
Layout parse_layout(std::string_view name);

/// Eigenvalues of each 3x3 diagonal block of the Hessian.
struct BlockSpec {
    std::vector<std::array<double, 3>> blocks;
    Layout layout = Layout::Heterogeneous;

    // [[1,2,3],[99,100,101],[4998,4999,5000]]
    static BlockSpec heterogeneous();
    // [[1,99,4998],[2,100,4999],[3,101,5000]]
    static BlockSpec homogeneous();
    static BlockSpec for_layout(Layout layout);

    void validate() const;
    std::size_t dim() const { return 3 * blocks.size(); }
};

struct QuadraticProblem {
    BlockSpec spec;
    Eigen::MatrixXd hessian;
    // Symmetric square root: design^T design == hessian.
    Eigen::MatrixXd design;
    std::vector<Eigen::Matrix3d> block_rotations;
    std::uint64_t seed = 0;

    std::size_t dim() const { return spec.dim(); }
    std::size_t num_blocks() const { return spec.blocks.size(); }
};

// Eigenvectors of A A^T, columns by descending eigenvalue, each column signed so
// its largest-magnitude entry is positive.
Eigen::Matrix3d rotation_from_gaussian(const Eigen::Matrix3d& a);

// Haar-distributed 3x3 orthogonal matrix; resamples when A A^T has a
// numerically repeated eigenvalue.
Eigen::Matrix3d haar_rotation(Rng& rng);

QuadraticProblem build_problem(const BlockSpec& spec, std::uint64_t seed);

double loss(const QuadraticProblem& problem, std::span<const double> w);
Vec full_gradient(const QuadraticProblem& problem, std::span<const double> w);

// (n/|rows|) * sum_{i in rows} x_i (x_i^T w) with x_i the rows of the design.
Vec gradient_from_rows(const QuadraticProblem& problem, std::span<const double> w,
                       std::span<const std::size_t> rows);

// Row-subsampled gradient, batch drawn uniformly without replacement.
Vec stochastic_grad(const QuadraticProblem& problem, std::span<const double> w,
                    std::size_t batch_size, Rng& rng);

// i.i.d. normal entries rescaled to l2 norm 3.
Vec default_w0(std::size_t dim, std::uint64_t seed);

inline constexpr double kDivergenceThreshold = 1e12;

struct RunRecord {
    std::string config_id;
    std::uint64_t seed = 0;
    Vec losses;                          // loss after each update
    std::vector<Vec> delta_block_means;  // per step, one entry per block; empty for non-Adam kinds
    bool diverged = false;

    // +inf for diverged runs.
    double final_loss() const;
};

struct RunSpec {
    OptimizerConfig config;
    Schedule schedule; // peak_lr is the tuned learning rate
    std::size_t steps = 1000;
    std::size_t batch_size = 3;
};

RunRecord run_experiment(const QuadraticProblem& problem, const RunSpec& run, std::span<const double> w0,
                         std::uint64_t seed, std::string config_id);

struct Candidate {
    std::string label;
    OptimizerConfig config;
};

struct TuneSettings {
    std::vector<double> lr_grid;
    std::vector<std::uint64_t> seeds;
    std::size_t steps = 1000;
    std::size_t batch_size = 3;
    double warmup_fraction = 0.1;
    double floor_lr = 0.0;
    unsigned jobs = 1;
};

// 2^i for i in [lo, hi].
std::vector<double> power_of_two_grid(int lo, int hi);

struct FinalLossStats {
    double median = 0.0;
    double q25 = 0.0;
    double q75 = 0.0;
    std::size_t diverged_runs = 0;
};

// Linear-interpolation quantiles of final losses (diverged runs count as +inf).
FinalLossStats summarize_final_losses(std::span<const RunRecord> runs);
double quantile(std::vector<double> values, double q);

struct LrCell {
    double lr = 0.0;
    FinalLossStats stats;
};

struct CandidateResult {
    Candidate candidate;
    std::vector<LrCell> cells; // in lr_grid order
    double best_lr = 0.0;
    FinalLossStats best;
    bool all_diverged = false;
    std::vector<RunRecord> best_runs; // one per seed, in seed order
};

struct ComparisonSummary {
    Layout layout = Layout::Heterogeneous;
    std::vector<CandidateResult> results; // in candidate order

    const CandidateResult& at(std::string_view label) const;
};

ComparisonSummary tune_and_compare(const QuadraticProblem& problem,
                                   std::span<const Candidate> candidates,
                                   const TuneSettings& settings);

// Signum with fixed mollifier m/sqrt(m^2+eps) or m/(|m|+eps) for every eps
// and placement, next to AdamEqualBeta, all at the given beta.
std::vector<Candidate> epsilon_ablation_candidates(double beta, std::span<const double> eps_grid);

struct EpsilonAblation {
    ComparisonSummary summary;
    std::string best_signum_label;
    double best_signum_median = 0.0;
    double adam_median = 0.0;
};

EpsilonAblation signum_epsilon_ablation(const QuadraticProblem& problem, double beta,
                                        std::span<const double> eps_grid,
                                        const TuneSettings& settings);

// Time average of each block's delta mean over a run.
Vec time_averaged_block_deltas(const RunRecord& run);

} // namespace adamlab
