#include "adamlab/equiv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adamlab/rng.hpp"

namespace adamlab {

namespace {

void track(ResidualReport& r, double residual, std::size_t index) {
    if (r.argmax_index < 0 || residual > r.max_abs_residual || std::isnan(residual)) {
        r.max_abs_residual = residual;
        r.argmax_index = static_cast<std::ptrdiff_t>(index);
    }
}

void finish(ResidualReport& r) { r.passed = r.max_abs_residual <= r.tolerance; }

double ratio_or_zero(double num, double denom_sq) {
    return denom_sq == 0.0 ? 0.0 : num / std::sqrt(denom_sq);
}

} // namespace

double default_prop1_tolerance(std::size_t length) {
    return std::max(1e-9, 1e-12 * static_cast<double>(length));
}

Prop1Report check_prop1(std::span<const double> signal, double beta, double tol, InitMode init,
                        double variance_tol) {
    if (!(beta >= 0.0 && beta < 1.0)) throw PreconditionError("check_prop1: beta outside [0, 1)");
    if (!all_finite(signal)) throw NumericError("check_prop1: non-finite signal");

    Prop1Report report;
    report.direction.tolerance = tol;
    report.variance.tolerance = variance_tol;

    double m = 0.0;     // shared first moment
    double v = 0.0;     // standard second moment
    double delta = 0.0; // recursive variance term
    for (std::size_t k = 0; k < signal.size(); ++k) {
        const double g = signal[k];
        if (k == 0 && init == InitMode::FirstSampleInit) {
            m = g;
            v = g * g;
            delta = 0.0;
        } else {
            delta = beta * delta + beta * (1.0 - beta) * (m - g) * (m - g);
            m = beta * m + (1.0 - beta) * g;
            v = beta * v + (1.0 - beta) * g * g;
        }
        const double d_standard = ratio_or_zero(m, v);
        const double d_variance = ratio_or_zero(m, m * m + delta);
        track(report.direction, std::abs(d_standard - d_variance), k);

        const double scale = std::max(v, std::numeric_limits<double>::min());
        track(report.variance, std::abs((v - m * m) - delta) / scale, k);
    }
    if (report.direction.argmax_index < 0) report.direction.argmax_index = 0;
    if (report.variance.argmax_index < 0) report.variance.argmax_index = 0;
    finish(report.direction);
    finish(report.variance);
    return report;
}

double prop2_condition(double beta1, double beta2) {
    if (!(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0))
        throw PreconditionError("prop2_condition: betas must lie in (0, 1)");
    const double diff = beta1 - beta2;
    return diff * diff;
}

CompletingSquareReport completing_square_check(double beta1, double beta2) {
    prop2_condition(beta1, beta2); // domain check
    CompletingSquareReport r;
    r.beta1 = beta1;
    r.beta2 = beta2;
    r.required_coefficient = beta2;
    const double b_sq = (1.0 - beta2) - (1.0 - beta1) * (1.0 - beta1);
    r.cleared_margin = std::abs(beta1 * beta1 * (1.0 - beta2) - beta2 * b_sq);
    if (!(b_sq > 0.0)) return r;

    r.defined = true;
    r.b = std::sqrt(b_sq);
    r.a = beta1 * (1.0 - beta1) / r.b;
    r.leftover_coefficient = beta1 * beta1 * (1.0 - beta2) / b_sq;
    r.margin = std::abs(r.leftover_coefficient - r.required_coefficient);

    // Check the expansion itself on random states; v >= m^2 as for any EMA pair.
    Rng rng(0x5eed'0002ULL);
    for (int trial = 0; trial < 256; ++trial) {
        const double m = rng.normal();
        const double v = m * m + std::abs(rng.normal());
        const double g = 2.0 * rng.normal();
        const double m_next = beta1 * m + (1.0 - beta1) * g;
        const double lhs = beta2 * v + (1.0 - beta2) * g * g - m_next * m_next;
        const double sq = r.a * m - r.b * g;
        const double rhs = beta2 * v - r.leftover_coefficient * m * m + sq * sq;
        const double scale = std::max({1.0, std::abs(lhs), r.leftover_coefficient * m * m});
        r.expansion_residual = std::max(r.expansion_residual, std::abs(lhs - rhs) / scale);
    }
    return r;
}

double mollified_direction(double m, double variance) {
    if (!(variance >= 0.0)) throw PreconditionError("mollified_direction: negative variance");
    if (m == 0.0) return 0.0;
    return sign(m) / std::sqrt(1.0 + variance / (m * m));
}

double trust_radius(double m, double variance) {
    if (!(variance >= 0.0)) throw PreconditionError("trust_radius: negative variance");
    if (m == 0.0) return 0.0;
    return 1.0 / std::sqrt(1.0 + variance / (m * m));
}

double grid_argmin_linear(double m, double radius, std::size_t grid_points) {
    if (grid_points < 2) throw PreconditionError("grid_argmin_linear: need at least 2 points");
    double best_theta = 0.0;
    double best_value = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid_points; ++i) {
        const double theta =
            -radius + 2.0 * radius * static_cast<double>(i) / static_cast<double>(grid_points - 1);
        const double value = -m * theta;
        if (value < best_value) {
            best_value = value;
            best_theta = theta;
        }
    }
    return best_theta;
}

} // namespace adamlab
