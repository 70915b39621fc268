#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "adamlab/errors.hpp"

namespace adamlab {

using Vec = std::vector<double>;

enum class InitMode { ZeroInit, FirstSampleInit };

/**
 * Normalized exponential moving average
 *
 *   ema_k = beta * ema_{k-1} + (1 - beta) * s_k
 *
 * seeded either with zero (ZeroInit) or with the first sample
 * (FirstSampleInit). Under ZeroInit the weights of the samples seen so far
 * sum to 1 - beta^step, which is what bias_correct() divides out.
 */
struct EmaBuffer {
    Vec value;
    double beta = 0.0;
    std::size_t step = 0;
    InitMode init_mode = InitMode::ZeroInit;

    EmaBuffer() = default;
    EmaBuffer(std::size_t dim, double beta, InitMode mode = InitMode::ZeroInit);

    std::size_t size() const { return value.size(); }

    void update(std::span<const double> sample);
};

// Returns the buffer after one update; `buf` itself is left untouched.
EmaBuffer ema_update(EmaBuffer buf, std::span<const double> sample);

// value / (1 - beta^step), elementwise. Requires step >= 1.
Vec bias_correct(std::span<const double> value, double beta, std::size_t step);
double bias_correction_factor(double beta, std::size_t step);

// Global l2 clipping: min{1, threshold/||g||} * g.
Vec gclip(std::span<const double> g, double threshold);

// Coordinatewise clamp to [-bound, bound].
Vec cclip(std::span<const double> v, double bound);

struct ClipConfig {
    std::optional<double> gclip_threshold;
    std::optional<double> cclip_bound;

    void validate() const;
    bool operator==(const ClipConfig&) const = default;
};

// Linear warmup from 0 to peak_lr, then cosine annealing to floor_lr.
struct Schedule {
    double peak_lr = 1e-3;
    double floor_lr = 0.0;
    std::size_t total_steps = 1000;
    double warmup_fraction = 0.1;

    void validate() const;
    std::size_t warmup_steps() const;
    bool operator==(const Schedule&) const = default;
};

double lr_at(const Schedule& sched, std::size_t step);

// beta = 1 - kappa * (1 - beta_base) for each kappa, in order.
std::vector<double> beta_grid(double beta_base, std::span<const double> kappas);

// kappa in {2^-5, ..., 2^2}, the default accumulation-factor grid.
std::vector<double> default_kappas();

double sign(double x);
double l2_norm(std::span<const double> v);
double linf_norm(std::span<const double> v);
bool all_finite(std::span<const double> v);

} // namespace adamlab
