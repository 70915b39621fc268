#pragma once

namespace adamlab {

/// Online estimate of the gradient mean and variance.
/// variance == 0 is admitted only as the zero-initialized starting belief.
struct GaussianBelief {
    double mean = 0.0;
    double variance = 0.0;

    bool operator==(const GaussianBelief&) const = default;
};

/**
 * Regularized negative log-likelihood of one observation g:
 *
 *   1/2 log s2 + (g - m)^2 / (2 s2)
 *     + lambda/2 [ s2_k/s2 + (m_k - m)^2/s2 - 1 - log(s2_k/s2) ]
 *
 * where (m_k, s2_k) is the prior belief and (m, s2) the candidate.
 */
double vi_objective(const GaussianBelief& prior, const GaussianBelief& candidate, double g,
                    double lambda);

/// Weight of the prior in the closed-form update: beta = lambda / (1 + lambda).
double lambda_beta(double lambda);

/// Inverse of lambda_beta: lambda = beta / (1 - beta).
double beta_lambda(double beta);

/**
 * Closed-form minimizer of vi_objective:
 *   mean'     = beta mean + (1 - beta) g
 *   variance' = beta variance + beta (1 - beta) (mean - g)^2
 * with beta = lambda_beta(lambda). lambda = +inf keeps the prior.
 */
GaussianBelief vi_update(const GaussianBelief& prior, double g, double lambda);

/// Same recursion parameterized directly by the moving-average factor.
GaussianBelief vi_update_beta(const GaussianBelief& prior, double g, double beta);

/// Derivative-free minimization of vi_objective: golden-section on log(variance)
/// with an inner golden-section on the mean. Throws OracleFailure if the
/// minimum cannot be bracketed.
GaussianBelief vi_numeric_oracle(const GaussianBelief& prior, double g, double lambda, double tol);

} // namespace adamlab
