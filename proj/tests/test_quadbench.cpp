#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "adamlab/quadbench.hpp"

using namespace adamlab;
using doctest::Approx;

namespace {

std::vector<std::vector<std::size_t>> all_subsets(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> cur;
    auto rec = [&](auto&& self, std::size_t start) -> void {
        if (cur.size() == k) {
            out.push_back(cur);
            return;
        }
        for (std::size_t i = start; i < n; ++i) {
            cur.push_back(i);
            self(self, i + 1);
            cur.pop_back();
        }
    };
    rec(rec, 0);
    return out;
}

Vec random_w(Rng& rng, std::size_t dim) {
    Vec w(dim);
    for (auto& x : w) x = rng.normal();
    return w;
}

// Hw evaluated directly from the dense Hessian.
Vec hessian_times(const QuadraticProblem& p, const Vec& w) {
    Vec out(w.size(), 0.0);
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j) out[i] += p.hessian(i, j) * w[j];
    return out;
}

} // namespace

TEST_CASE("haar rotations are orthogonal and deterministic") {
    Rng a(3), b(3);
    for (int i = 0; i < 200; ++i) {
        const Eigen::Matrix3d q = haar_rotation(a);
        CHECK((q.transpose() * q - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-12);
        CHECK(q == haar_rotation(b));
    }
}

TEST_CASE("identity input gives a permutation matrix") {
    const Eigen::Matrix3d q = rotation_from_gaussian(Eigen::Matrix3d::Identity());
    for (int i = 0; i < 3; ++i) {
        int ones = 0;
        for (int j = 0; j < 3; ++j) {
            CHECK((q(i, j) == Approx(0.0).scale(1.0) || q(i, j) == Approx(1.0)));
            ones += std::abs(q(i, j) - 1.0) < 1e-12;
        }
        CHECK(ones == 1);
    }
}

TEST_CASE("block traces") {
    const auto het = build_problem(BlockSpec::heterogeneous(), 0);
    const auto hom = build_problem(BlockSpec::homogeneous(), 0);
    const double het_want[] = {6, 300, 14997};
    const double hom_want[] = {5098, 5101, 5104};
    for (int b = 0; b < 3; ++b) {
        CHECK(het.hessian.block<3, 3>(3 * b, 3 * b).trace() == Approx(het_want[b]).epsilon(1e-12));
        CHECK(hom.hessian.block<3, 3>(3 * b, 3 * b).trace() == Approx(hom_want[b]).epsilon(1e-12));
    }
    // off-diagonal blocks are exactly zero
    CHECK(het.hessian.block<3, 3>(0, 3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(het.hessian.block<3, 3>(6, 0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("spectral invariants over many seeds") {
    for (auto layout : {Layout::Heterogeneous, Layout::Homogeneous}) {
        const BlockSpec spec = BlockSpec::for_layout(layout);
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const auto p = build_problem(spec, seed);
            CHECK((p.hessian - p.hessian.transpose()).cwiseAbs().maxCoeff() == 0.0);
            for (int b = 0; b < 3; ++b) {
                const auto& l = spec.blocks[b];
                const Eigen::Matrix3d hb = p.hessian.block<3, 3>(3 * b, 3 * b);
                CHECK(hb.determinant() == Approx(l[0] * l[1] * l[2]).epsilon(1e-9));
                CHECK((hb * hb).trace() == Approx(l[0] * l[0] + l[1] * l[1] + l[2] * l[2]).epsilon(1e-12));
            }
            const double scale = p.hessian.cwiseAbs().maxCoeff();
            CHECK((p.design.transpose() * p.design - p.hessian).cwiseAbs().maxCoeff() <= 1e-9 * scale);
        }
    }
}

TEST_CASE("problems are reproducible from the seed") {
    const auto a = build_problem(BlockSpec::heterogeneous(), 42);
    const auto b = build_problem(BlockSpec::heterogeneous(), 42);
    const auto c = build_problem(BlockSpec::heterogeneous(), 43);
    CHECK(a.hessian == b.hessian);
    CHECK(a.design == b.design);
    CHECK(a.hessian != c.hessian);
}

TEST_CASE("loss and gradients") {
    const auto p = build_problem(BlockSpec::homogeneous(), 1);
    Rng rng(9);
    std::vector<std::size_t> every{0, 1, 2, 3, 4, 5, 6, 7, 8};
    for (int trial = 0; trial < 20; ++trial) {
        const Vec w = random_w(rng, 9);
        const Vec hw = hessian_times(p, w);
        const double scale = linf_norm(hw);
        const Vec full = full_gradient(p, w);
        const Vec rows = gradient_from_rows(p, w, every);
        Rng batch_rng(trial);
        const Vec all9 = stochastic_grad(p, w, 9, batch_rng);
        for (std::size_t i = 0; i < 9; ++i) {
            CHECK(std::abs(full[i] - hw[i]) <= 1e-12 * scale);
            CHECK(std::abs(rows[i] - hw[i]) <= 1e-12 * scale);
            CHECK(std::abs(all9[i] - hw[i]) <= 1e-12 * scale);
        }
        double whw = 0.0;
        for (std::size_t i = 0; i < 9; ++i) whw += w[i] * hw[i];
        const Eigen::VectorXd xw = p.design * Eigen::Map<const Eigen::VectorXd>(w.data(), 9);
        CHECK(loss(p, w) == Approx(0.5 * whw).epsilon(1e-12));
        CHECK(loss(p, w) == Approx(0.5 * xw.squaredNorm()).epsilon(1e-12));
    }
    Rng r(1);
    CHECK(stochastic_grad(p, Vec(9, 0.0), 3, r) == Vec(9, 0.0));
    CHECK_THROWS_AS(stochastic_grad(p, Vec(9, 0.0), 0, r), PreconditionError);
    CHECK_THROWS_AS(stochastic_grad(p, Vec(9, 0.0), 10, r), PreconditionError);
    CHECK_THROWS_AS(loss(p, Vec(8, 0.0)), DimensionError);
}

TEST_CASE("row subsampling is unbiased and uniform over subsets") {
    const auto p = build_problem(BlockSpec::heterogeneous(), 5);
    Rng wr(2);
    const Vec w = random_w(wr, 9);
    const Vec hw = hessian_times(p, w);
    for (std::size_t batch : {1u, 3u}) {
        const auto subsets = all_subsets(9, batch);
        CHECK(subsets.size() == (batch == 1 ? 9u : 84u));
        std::vector<Vec> table;
        Vec mean(9, 0.0);
        for (const auto& s : subsets) {
            table.push_back(gradient_from_rows(p, w, s));
            for (std::size_t i = 0; i < 9; ++i) mean[i] += table.back()[i] / static_cast<double>(subsets.size());
        }
        for (std::size_t i = 0; i < 9; ++i) CHECK(mean[i] == Approx(hw[i]).epsilon(1e-9).scale(linf_norm(hw)));

        // every draw must be one of the enumerated subset gradients, at uniform frequency
        Rng rng(11);
        const int draws = 200 * static_cast<int>(subsets.size());
        std::vector<int> counts(subsets.size(), 0);
        int unmatched = 0;
        for (int d = 0; d < draws; ++d) {
            const Vec g = stochastic_grad(p, w, batch, rng);
            bool hit = false;
            for (std::size_t s = 0; s < table.size() && !hit; ++s) {
                double gap = 0.0;
                for (std::size_t i = 0; i < 9; ++i) gap = std::max(gap, std::abs(g[i] - table[s][i]));
                if (gap <= 1e-9 * linf_norm(table[s]) + 1e-12) {
                    ++counts[s];
                    hit = true;
                }
            }
            unmatched += !hit;
        }
        CHECK(unmatched == 0);
        // 200 expected per subset; binomial sd ~ 14
        for (int c : counts) CHECK(std::abs(c - 200) < 80);
    }
}

TEST_CASE("default_w0 has norm three") {
    const Vec w = default_w0(9, 0);
    CHECK(l2_norm(w) == Approx(3.0).epsilon(1e-14));
    CHECK(default_w0(9, 0) == w);
    CHECK(default_w0(9, 1) != w);
}

TEST_CASE("runs: zero learning rate, full-batch descent, determinism, divergence") {
    const auto p = build_problem(BlockSpec::heterogeneous(), 0);
    const Vec w0 = default_w0(9, 0);

    RunSpec zero{OptimizerConfig::adam_equal_beta(0.95), Schedule{0.0, 0.0, 100, 0.1}, 100, 3};
    const auto z = run_experiment(p, zero, w0, 1, "zero");
    REQUIRE(z.losses.size() == 100);
    for (double l : z.losses) CHECK(l == loss(p, w0));
    REQUIRE(z.delta_block_means.size() == 100);
    CHECK(z.delta_block_means.front().size() == 3);

    // plain gradient descent with lr < 2/L on the full batch never increases the loss
    RunSpec gd{OptimizerConfig::sgd(0.0), Schedule{1e-4, 1e-4, 300, 0.0}, 300, 9};
    const auto r = run_experiment(p, gd, w0, 1, "gd");
    CHECK(r.losses.front() < loss(p, w0));
    for (std::size_t k = 1; k < r.losses.size(); ++k) CHECK(r.losses[k] <= r.losses[k - 1]);
    CHECK(r.delta_block_means.empty());

    RunSpec adam{OptimizerConfig::adam_equal_beta(0.95), Schedule{1e-2, 0.0, 200, 0.1}, 200, 3};
    const auto a1 = run_experiment(p, adam, w0, 7, "adam");
    const auto a2 = run_experiment(p, adam, w0, 7, "adam");
    const auto a3 = run_experiment(p, adam, w0, 8, "adam");
    CHECK(a1.losses == a2.losses);
    CHECK(a1.delta_block_means == a2.delta_block_means);
    CHECK(a1.losses != a3.losses);

    RunSpec boom{OptimizerConfig::sgd(0.0), Schedule{1.0, 1.0, 200, 0.0}, 200, 9};
    const auto d = run_experiment(p, boom, w0, 1, "boom");
    CHECK(d.diverged);
    CHECK(std::isinf(d.final_loss()));
    CHECK_FALSE(a1.diverged);
    CHECK(a1.final_loss() == a1.losses.back());
}

TEST_CASE("quantiles and summaries") {
    CHECK(quantile({4, 1, 3, 2}, 0.5) == 2.5);
    CHECK(quantile({4, 1, 3, 2}, 0.25) == 1.75);
    CHECK(quantile({4, 1, 3, 2}, 0.75) == 3.25);
    CHECK(quantile({5}, 0.3) == 5);
    CHECK_THROWS_AS(quantile({}, 0.5), PreconditionError);

    std::vector<RunRecord> runs(3);
    runs[0].losses = {1.0};
    runs[1].losses = {2.0};
    runs[2].losses = {3.0};
    runs[2].diverged = true;
    const auto s = summarize_final_losses(runs);
    CHECK(s.median == 2.0);
    CHECK(s.diverged_runs == 1);
    CHECK(std::isinf(s.q75));
}

TEST_CASE("tuning is independent of the worker count") {
    const auto p = build_problem(BlockSpec::homogeneous(), 0);
    const std::vector<Candidate> cands{{"sgd", OptimizerConfig::sgd(0.95)},
                                       {"adam_equal_beta", OptimizerConfig::adam_equal_beta(0.95)}};
    TuneSettings s;
    s.lr_grid = power_of_two_grid(-10, -6);
    s.seeds = {0, 1, 2};
    s.steps = 120;
    s.jobs = 1;
    const auto one = tune_and_compare(p, cands, s);
    s.jobs = 4;
    const auto four = tune_and_compare(p, cands, s);
    for (const auto& c : cands) {
        const auto& x = one.at(c.label);
        const auto& y = four.at(c.label);
        CHECK(x.best_lr == y.best_lr);
        CHECK(x.best.median == y.best.median);
        REQUIRE(x.best_runs.size() == 3);
        for (std::size_t i = 0; i < 3; ++i) CHECK(x.best_runs[i].losses == y.best_runs[i].losses);
        // the chosen cell has the smallest median
        for (const auto& cell : x.cells) CHECK(x.best.median <= cell.stats.median);
    }
    CHECK(power_of_two_grid(-2, 1) == std::vector<double>{0.25, 0.5, 1.0, 2.0});
}

TEST_CASE("time-averaged block deltas") {
    RunRecord r;
    r.delta_block_means = {{1.0, 2.0, 3.0}, {3.0, 4.0, 5.0}};
    CHECK(time_averaged_block_deltas(r) == Vec{2.0, 3.0, 4.0});
}
