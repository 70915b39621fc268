#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adamlab/core.hpp"
#include "adamlab/optim.hpp"
#include "adamlab/rng.hpp"

namespace adamlab {

struct SignalSpec {
    double amplitude = 1.8;
    double frequency = 0.03; // radians per step
    double decay = 0.0025;
    std::size_t length = 2000;

    bool operator==(const SignalSpec&) const = default;
};

// amplitude * sin(frequency * k) * exp(-decay * k), k = 0 .. length-1
Vec gen_signal(const SignalSpec& spec);

enum class FilterType { Sign, AdamEqualBeta, Signum, EmaSign };

std::string_view to_string(FilterType type);
FilterType parse_filter_type(std::string_view name);

struct FilterKind {
    FilterType type = FilterType::AdamEqualBeta;
    double beta = 0.95;
    InitMode init_mode = InitMode::ZeroInit;

    bool operator==(const FilterKind&) const = default;
};

// Optimizer configuration the filter streams through: epsilon = 0, no bias correction.
OptimizerConfig filter_config(const FilterKind& kind);

// d_k for each g_k of a scalar signal, produced by the optim direction map.
Vec filter_response(const FilterKind& kind, std::span<const double> signal);

using Filter = std::function<Vec(std::span<const double>)>;

Filter make_filter(const FilterKind& kind);

struct PropertyCheck {
    std::string name;
    double max_violation = 0.0;
    bool passed = true;
};

struct PropertyReport {
    std::vector<PropertyCheck> checks; // causal, scale_invariant, odd, bounded
    bool passed() const;
    const PropertyCheck& at(std::string_view name) const;
};

/**
 * Checks causality, positive-scale invariance (alpha in {0.5, 2, 10}),
 * oddness and ||T(g)||_inf <= 1 on `trials` random signals of `length`
 * samples. Half of the trials are Gaussian noise, half are random damped
 * sinusoids. Failures are reported, never thrown.
 */
PropertyReport check_properties(const Filter& filter, std::size_t trials, double tol, Rng& rng,
                                std::size_t length = 256);
PropertyReport check_properties(const FilterKind& kind, std::size_t trials, double tol, Rng& rng,
                                std::size_t length = 256);

struct DecayBlindnessReport {
    double max_gap = 0.0;
    std::size_t burn_in = 0;
    double tolerance = 0.0;
    bool passed = true;
};

// Compares responses to the damped signal and its undamped counterpart
// after a burn-in of one period.
DecayBlindnessReport decay_blindness(const FilterKind& kind, const SignalSpec& spec,
                                     double tol = 0.05);

struct DensityWitness {
    bool found = false;
    Vec signal;            // g_0 .. g_k
    double achieved = 0.0; // d_k produced by `signal`
};

/**
 * Searches the family g_0..g_{k-1} = a, g_k = t for d_k == target, with
 * a = sign(target) (the magnitude of a is irrelevant by scale invariance)
 * and t found by bisection. Not finding a witness is a normal outcome.
 */
DensityWitness density_witness(double target, std::size_t k, const FilterKind& kind,
                               double tol = 1e-6);

} // namespace adamlab
