#pragma once

#include <cstddef>
#include <span>

#include "adamlab/core.hpp"

namespace adamlab {

struct ResidualReport {
    double max_abs_residual = 0.0;
    std::ptrdiff_t argmax_index = -1;
    double tolerance = 0.0;
    bool passed = true;
};

// Both sides of the equal-beta identity, run over a scalar gradient stream.
struct Prop1Report {
    // |m/sqrt(v) - m/sqrt(m^2 + delta)|
    ResidualReport direction;
    // |(v - m^2) - delta| / max(v, tiny)
    ResidualReport variance;
    bool passed() const { return direction.passed && variance.passed; }
};

// Default tolerance for a stream of the given length: 1e-9 up to 1000 steps,
// growing linearly beyond.
double default_prop1_tolerance(std::size_t length);

/**
 * Runs d = m/sqrt(v) and d = m/sqrt(m^2 + delta) side by side with
 * delta advanced by delta' = beta*delta + beta(1-beta)(m_prev - g)^2.
 * epsilon = 0, no bias correction; 0/0 steps give d = 0 on both sides.
 * The variance residual uses `variance_tol` (relative to v).
 */
Prop1Report check_prop1(std::span<const double> signal, double beta, double tol,
                        InitMode init = InitMode::ZeroInit, double variance_tol = 1e-10);

// (beta1 - beta2)^2, zero iff the variance-form representation exists.
double prop2_condition(double beta1, double beta2);

/**
 * Completing the square in v' - m'^2 for unequal betas. Writing
 * b^2 = (1-beta2) - (1-beta1)^2 and ab = beta1(1-beta1), the leftover m^2
 * coefficient c = beta1^2 (1-beta2) / b^2 must equal beta2 for the
 * recursion to take the form beta2*(v - m^2) + (a m - b g)^2.
 */
struct CompletingSquareReport {
    double beta1 = 0.0;
    double beta2 = 0.0;
    bool defined = false; // false when b^2 <= 0
    double a = 0.0;
    double b = 0.0;
    double leftover_coefficient = 0.0;
    double required_coefficient = 0.0;
    double margin = 0.0; // |leftover - required|
    // |beta1^2 (1-beta2) - beta2 b^2|: the same condition with the denominator
    // cleared, defined for every pair and equal to (beta1 - beta2)^2.
    double cleared_margin = 0.0;
    // max over random (v, m, g) of |v'-m'^2 - [beta2 v - c m^2 + (a m - b g)^2]|
    double expansion_residual = 0.0;
};

CompletingSquareReport completing_square_check(double beta1, double beta2);

// m / sqrt(m^2 + variance) == sign(m) / sqrt(1 + variance/m^2); 0 when m == 0.
double mollified_direction(double m, double variance);

// 1 / sqrt(1 + variance/m^2); 0 when m == 0.
double trust_radius(double m, double variance);

// argmin of -m*theta over |theta| <= radius, by exhaustive grid search.
double grid_argmin_linear(double m, double radius, std::size_t grid_points);

} // namespace adamlab
