#include "adamlab/signal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace adamlab {

Vec gen_signal(const SignalSpec& spec) {
    Vec g(spec.length);
    for (std::size_t k = 0; k < spec.length; ++k) {
        const double t = static_cast<double>(k);
        g[k] = spec.amplitude * std::sin(spec.frequency * t) * std::exp(-spec.decay * t);
    }
    return g;
}

std::string_view to_string(FilterType type) {
    switch (type) {
    case FilterType::Sign: return "sign";
    case FilterType::AdamEqualBeta: return "adam";
    case FilterType::Signum: return "signum";
    case FilterType::EmaSign: return "emasign";
    }
    return "unknown";
}

FilterType parse_filter_type(std::string_view name) {
    if (name == "sign") return FilterType::Sign;
    if (name == "adam" || name == "adam_equal_beta") return FilterType::AdamEqualBeta;
    if (name == "signum") return FilterType::Signum;
    if (name == "emasign") return FilterType::EmaSign;
    throw ConfigError("unknown filter '" + std::string(name) + "'");
}

OptimizerConfig filter_config(const FilterKind& kind) {
    if (!(kind.beta >= 0.0 && kind.beta < 1.0)) throw PreconditionError("filter beta outside [0, 1)");
    OptimizerConfig c;
    switch (kind.type) {
    case FilterType::Sign: c = OptimizerConfig::sign_sgd(); break;
    case FilterType::AdamEqualBeta: c = OptimizerConfig::adam_equal_beta(kind.beta); break;
    case FilterType::Signum: c = OptimizerConfig::signum(kind.beta); break;
    case FilterType::EmaSign: c = OptimizerConfig::ema_sign(kind.beta); break;
    }
    c.epsilon = 0.0;
    c.bias_correction = false;
    c.init_mode = kind.init_mode;
    return c;
}

Vec filter_response(const FilterKind& kind, std::span<const double> signal) {
    const OptimizerConfig config = filter_config(kind);
    OptimizerState state = init_state(config, 1);
    Vec out;
    out.reserve(signal.size());
    for (double g : signal) {
        const double sample[1] = {g};
        out.push_back(direction(config, state, sample)[0]);
    }
    return out;
}

Filter make_filter(const FilterKind& kind) {
    return [kind](std::span<const double> s) { return filter_response(kind, s); };
}

bool PropertyReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const PropertyCheck& c) { return c.passed; });
}

const PropertyCheck& PropertyReport::at(std::string_view name) const {
    for (const auto& c : checks)
        if (c.name == name) return c;
    throw std::out_of_range("no property check named '" + std::string(name) + "'");
}

namespace {

Vec random_signal(Rng& rng, std::size_t length, std::size_t trial) {
    Vec g(length);
    if (trial % 2 == 0) {
        const double scale = std::exp(rng.uniform(-3.0, 3.0));
        for (auto& x : g) x = scale * rng.normal();
    } else {
        const double amp = std::exp(rng.uniform(-2.0, 2.0));
        const double freq = rng.uniform(0.005, 0.5);
        const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
        const double decay = rng.uniform(0.0, 0.01);
        for (std::size_t k = 0; k < length; ++k) {
            const double t = static_cast<double>(k);
            g[k] = amp * std::sin(freq * t + phase) * std::exp(-decay * t) + 0.1 * amp * rng.normal();
        }
    }
    return g;
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
    return m;
}

} // namespace

PropertyReport check_properties(const Filter& filter, std::size_t trials, double tol, Rng& rng,
                                std::size_t length) {
    if (trials == 0) throw PreconditionError("check_properties: trials must be >= 1");
    if (length == 0) throw PreconditionError("check_properties: length must be >= 1");
    PropertyCheck causal{"causal"}, scale{"scale_invariant"}, odd{"odd"}, bounded{"bounded"};

    for (std::size_t trial = 0; trial < trials; ++trial) {
        const Vec g = random_signal(rng, length, trial);
        const Vec d = filter(g);

        const std::size_t cut = 1 + static_cast<std::size_t>(rng.index(length));
        const Vec d_prefix = filter(std::span(g).first(cut));
        causal.max_violation =
            std::max(causal.max_violation, max_abs_diff(d_prefix, std::span(d).first(cut)));

        for (double alpha : {0.5, 2.0, 10.0}) {
            Vec scaled = g;
            for (auto& x : scaled) x *= alpha;
            scale.max_violation = std::max(scale.max_violation, max_abs_diff(filter(scaled), d));
        }

        Vec neg = g;
        for (auto& x : neg) x = -x;
        const Vec d_neg = filter(neg);
        double odd_gap = 0.0;
        for (std::size_t i = 0; i < d.size(); ++i) odd_gap = std::max(odd_gap, std::abs(d_neg[i] + d[i]));
        if (d_neg.size() != d.size()) odd_gap = std::numeric_limits<double>::infinity();
        odd.max_violation = std::max(odd.max_violation, odd_gap);

        bounded.max_violation = std::max(bounded.max_violation, std::max(0.0, linf_norm(d) - 1.0));
    }

    PropertyReport report;
    for (auto* c : {&causal, &scale, &odd, &bounded}) {
        c->passed = c->max_violation <= tol;
        report.checks.push_back(*c);
    }
    return report;
}

PropertyReport check_properties(const FilterKind& kind, std::size_t trials, double tol, Rng& rng,
                                std::size_t length) {
    return check_properties(make_filter(kind), trials, tol, rng, length);
}

DecayBlindnessReport decay_blindness(const FilterKind& kind, const SignalSpec& spec, double tol) {
    if (!(spec.frequency > 0.0)) throw PreconditionError("decay_blindness: frequency must be positive");
    SignalSpec undamped = spec;
    undamped.decay = 0.0;
    const Vec damped_response = filter_response(kind, gen_signal(spec));
    const Vec periodic_response = filter_response(kind, gen_signal(undamped));

    DecayBlindnessReport r;
    r.tolerance = tol;
    r.burn_in = static_cast<std::size_t>(std::ceil(2.0 * std::numbers::pi / spec.frequency));
    for (std::size_t k = r.burn_in; k < spec.length; ++k)
        r.max_gap = std::max(r.max_gap, std::abs(damped_response[k] - periodic_response[k]));
    r.passed = r.max_gap <= tol;
    return r;
}

DensityWitness density_witness(double target, std::size_t k, const FilterKind& kind, double tol) {
    if (!(std::abs(target) <= 1.0)) throw PreconditionError("density_witness: |target| must be <= 1");
    if (target < 0.0) {
        DensityWitness w = density_witness(-target, k, kind, tol);
        for (auto& x : w.signal) x = -x;
        w.achieved = -w.achieved;
        return w;
    }

    auto build = [k](double t) {
        Vec s(k + 1, 1.0);
        s[k] = t;
        return s;
    };
    auto response = [&](double t) { return filter_response(kind, build(t)).back(); };

    DensityWitness best;
    double best_err = std::numeric_limits<double>::infinity();
    auto consider = [&](double t, double d) {
        const double err = std::abs(d - target);
        if (err < best_err) {
            best_err = err;
            best.signal = build(t);
            best.achieved = d;
        }
        return err <= tol;
    };

    // d_k(t) rises from its t -> -inf limit to its peak at t = 1 (constant signal).
    double hi = 1.0;
    const double d_hi = response(hi);
    if (consider(hi, d_hi)) {
        best.found = true;
        return best;
    }
    if (d_hi < target) return best;

    double lo = -1.0;
    double d_lo = response(lo);
    for (int i = 0; i < 80 && d_lo > target; ++i) {
        if (consider(lo, d_lo)) {
            best.found = true;
            return best;
        }
        lo *= 2.0;
        d_lo = response(lo);
    }
    if (consider(lo, d_lo)) {
        best.found = true;
        return best;
    }
    if (d_lo > target) return best;

    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double d_mid = response(mid);
        if (consider(mid, d_mid)) {
            best.found = true;
            return best;
        }
        (d_mid < target ? lo : hi) = mid;
    }
    return best;
}

} // namespace adamlab
