#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>

#include "adamlab/core.hpp"

namespace adamlab {

enum class OptimizerKind { Sgd, SignSgd, Signum, EmaSign, RmsProp, Adam, AdamEqualBeta };

enum class EpsilonPlacement { OutsideSqrt, InsideSqrt };

std::string_view to_string(OptimizerKind kind);
OptimizerKind parse_optimizer_kind(std::string_view name);
std::string_view to_string(EpsilonPlacement p);
EpsilonPlacement parse_epsilon_placement(std::string_view name);
std::string_view to_string(InitMode m);
InitMode parse_init_mode(std::string_view name);

/**
 * Hyperparameters for every optimizer in the family.
 *
 * Single-momentum methods (Sgd, Signum, EmaSign) read their momentum from
 * beta1. RmsProp is Adam with beta1 = 0. For Signum, a positive epsilon
 * turns sign(m) into the fixed mollifier m / sqrt(m^2 + eps) (InsideSqrt)
 * or m / (|m| + eps) (OutsideSqrt).
 */
struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double beta1 = 0.9;
    double beta2 = 0.95;
    double epsilon = 1e-8;
    EpsilonPlacement epsilon_placement = EpsilonPlacement::OutsideSqrt;
    double weight_decay = 0.0;
    bool bias_correction = true;
    InitMode init_mode = InitMode::ZeroInit;
    ClipConfig clip;

    void validate() const;
    bool operator==(const OptimizerConfig&) const = default;

    static OptimizerConfig sgd(double beta);
    static OptimizerConfig sign_sgd();
    static OptimizerConfig signum(double beta);
    static OptimizerConfig ema_sign(double beta);
    static OptimizerConfig rmsprop(double beta2);
    static OptimizerConfig adam(double beta1, double beta2);
    static OptimizerConfig adam_equal_beta(double beta);
};

struct OptimizerState {
    EmaBuffer m;
    EmaBuffer v;
    // v - m^2 advanced by its own recursion; only AdamEqualBeta owns one.
    Vec delta;
    std::size_t step = 0;
};

OptimizerState init_state(const OptimizerConfig& config, std::size_t dim);

struct UpdateTrace {
    Vec direction;
    // Variance term entering the denominator (bias-corrected when enabled).
    // Adam reports max(v - m^2, 0); other kinds leave it empty.
    Vec delta_snapshot;
    double grad_norm = 0.0;
};

// Advances `state` by one gradient and returns the step direction before LR scaling.
UpdateTrace compute_update(const OptimizerConfig& config, OptimizerState& state,
                           std::span<const double> g);

Vec direction(const OptimizerConfig& config, OptimizerState& state, std::span<const double> g);

// w - lr * weight_decay * w - lr * d
Vec apply_step(std::span<const double> w, std::span<const double> d, double lr,
               double weight_decay);

} // namespace adamlab
