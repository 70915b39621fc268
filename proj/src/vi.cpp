#include "adamlab/vi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "adamlab/errors.hpp"

namespace adamlab {

namespace {

constexpr double kInvPhi = 0.6180339887498949; // 1/phi

// Golden-section minimization of a unimodal f on [lo, hi].
template <class F>
double golden_min(F&& f, double lo, double hi, double tol, int max_iter = 400) {
    double x1 = hi - kInvPhi * (hi - lo);
    double x2 = lo + kInvPhi * (hi - lo);
    double f1 = f(x1);
    double f2 = f(x2);
    for (int it = 0; it < max_iter && (hi - lo) > tol; ++it) {
        if (f1 <= f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kInvPhi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kInvPhi * (hi - lo);
            f2 = f(x2);
        }
    }
    return f1 <= f2 ? x1 : x2;
}

} // namespace

double vi_objective(const GaussianBelief& prior, const GaussianBelief& candidate, double g,
                    double lambda) {
    if (!(candidate.variance > 0.0))
        throw NumericError("vi_objective: candidate variance must be positive");
    if (!(prior.variance > 0.0)) throw NumericError("vi_objective: prior variance must be positive");
    if (!(lambda >= 0.0)) throw PreconditionError("vi_objective: lambda must be nonnegative");

    const double s2 = candidate.variance;
    const double r = g - candidate.mean;
    const double nll = 0.5 * std::log(s2) + r * r / (2.0 * s2);
    if (lambda == 0.0) return nll;
    const double ratio = prior.variance / s2;
    const double dm = prior.mean - candidate.mean;
    const double kl = 0.5 * (ratio + dm * dm / s2 - 1.0 - std::log(ratio));
    return nll + lambda * kl;
}

double lambda_beta(double lambda) {
    if (!(lambda >= 0.0)) throw PreconditionError("lambda_beta: lambda must be nonnegative");
    if (std::isinf(lambda)) return 1.0;
    return lambda / (1.0 + lambda);
}

double beta_lambda(double beta) {
    if (!(beta >= 0.0 && beta < 1.0)) throw PreconditionError("beta_lambda: beta outside [0, 1)");
    return beta / (1.0 - beta);
}

GaussianBelief vi_update_beta(const GaussianBelief& prior, double g, double beta) {
    if (!(beta >= 0.0 && beta <= 1.0)) throw PreconditionError("vi_update: beta outside [0, 1]");
    if (!(prior.variance >= 0.0)) throw PreconditionError("vi_update: negative prior variance");
    if (!std::isfinite(g) || !std::isfinite(prior.mean)) throw NumericError("vi_update: non-finite input");
    const double innovation = prior.mean - g;
    return {beta * prior.mean + (1.0 - beta) * g,
            beta * prior.variance + beta * (1.0 - beta) * innovation * innovation};
}

GaussianBelief vi_update(const GaussianBelief& prior, double g, double lambda) {
    if (!(lambda >= 0.0)) throw PreconditionError("vi_update: lambda must be nonnegative");
    return vi_update_beta(prior, g, lambda_beta(lambda));
}

GaussianBelief vi_numeric_oracle(const GaussianBelief& prior, double g, double lambda, double tol) {
    if (!(lambda > 0.0) || std::isinf(lambda))
        throw PreconditionError("vi_numeric_oracle: lambda must be positive and finite");
    if (!(prior.variance > 0.0))
        throw PreconditionError("vi_numeric_oracle: prior variance must be positive");
    if (!(tol > 0.0)) throw PreconditionError("vi_numeric_oracle: tol must be positive");

    // For fixed variance the objective is a convex quadratic in the mean whose
    // minimizer lies between g and the prior mean.
    const double m_lo = std::min(g, prior.mean);
    const double m_hi = std::max(g, prior.mean);
    const double m_tol = 1e-3 * tol * std::max(1.0, m_hi - m_lo) + 1e-15 * std::max(1.0, std::abs(m_hi));
    auto best_mean = [&](double s2) {
        if (m_hi == m_lo) return m_lo;
        return golden_min([&](double m) { return vi_objective(prior, {m, s2}, g, lambda); }, m_lo,
                          m_hi, m_tol);
    };
    auto profile = [&](double log_s2) {
        const double s2 = std::exp(log_s2);
        return vi_objective(prior, {best_mean(s2), s2}, g, lambda);
    };

    // Coarse log-spaced scan to bracket the minimum in log(variance).
    const double centre = std::log(std::max({prior.variance, (g - prior.mean) * (g - prior.mean),
                                             std::numeric_limits<double>::min()}));
    constexpr int kHalfWidth = 120;
    constexpr double kStep = 0.25;
    int best = 0;
    double best_value = std::numeric_limits<double>::infinity();
    for (int i = -kHalfWidth; i <= kHalfWidth; ++i) {
        const double value = profile(centre + kStep * i);
        if (value < best_value) {
            best_value = value;
            best = i;
        }
    }
    if (best == -kHalfWidth || best == kHalfWidth)
        throw OracleFailure("vi_numeric_oracle: minimum not bracketed (edge index " +
                            std::to_string(best) + ")");

    const double t_lo = centre + kStep * (best - 1);
    const double t_hi = centre + kStep * (best + 1);
    const double t = golden_min(profile, t_lo, t_hi, 1e-3 * tol);
    const double s2 = std::exp(t);
    return {best_mean(s2), s2};
}

} // namespace adamlab
