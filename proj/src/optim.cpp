#include "adamlab/optim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <utility>

namespace adamlab {

namespace {

constexpr std::array<std::pair<OptimizerKind, std::string_view>, 7> kKindNames{{
    {OptimizerKind::Sgd, "sgd"},
    {OptimizerKind::SignSgd, "signsgd"},
    {OptimizerKind::Signum, "signum"},
    {OptimizerKind::EmaSign, "emasign"},
    {OptimizerKind::RmsProp, "rmsprop"},
    {OptimizerKind::Adam, "adam"},
    {OptimizerKind::AdamEqualBeta, "adam_equal_beta"},
}};

bool uses_second_moment(OptimizerKind k) {
    return k == OptimizerKind::Adam || k == OptimizerKind::RmsProp;
}

// m / denom with the 0/0 := 0 convention.
double safe_ratio(double num, double denom) { return denom == 0.0 ? 0.0 : num / denom; }

double adam_ratio(double m, double second, double eps, EpsilonPlacement placement) {
    if (placement == EpsilonPlacement::InsideSqrt) return safe_ratio(m, std::sqrt(second + eps));
    return safe_ratio(m, std::sqrt(second) + eps);
}

double mollified_sign(double m, double eps, EpsilonPlacement placement) {
    if (eps == 0.0) return sign(m);
    if (placement == EpsilonPlacement::InsideSqrt) return m / std::sqrt(m * m + eps);
    return m / (std::abs(m) + eps);
}

} // namespace

std::string_view to_string(OptimizerKind kind) {
    for (const auto& [k, name] : kKindNames)
        if (k == kind) return name;
    return "unknown";
}

OptimizerKind parse_optimizer_kind(std::string_view name) {
    for (const auto& [k, n] : kKindNames)
        if (n == name) return k;
    if (name == "adam_eq" || name == "adameq") return OptimizerKind::AdamEqualBeta;
    throw ConfigError("unknown optimizer kind '" + std::string(name) + "'");
}

std::string_view to_string(EpsilonPlacement p) {
    return p == EpsilonPlacement::InsideSqrt ? "inside" : "outside";
}

EpsilonPlacement parse_epsilon_placement(std::string_view name) {
    if (name == "inside") return EpsilonPlacement::InsideSqrt;
    if (name == "outside") return EpsilonPlacement::OutsideSqrt;
    throw ConfigError("unknown epsilon placement '" + std::string(name) + "'");
}

std::string_view to_string(InitMode m) { return m == InitMode::ZeroInit ? "zero" : "first_sample"; }

InitMode parse_init_mode(std::string_view name) {
    if (name == "zero") return InitMode::ZeroInit;
    if (name == "first_sample") return InitMode::FirstSampleInit;
    throw ConfigError("unknown init mode '" + std::string(name) + "'");
}

void OptimizerConfig::validate() const {
    auto in_unit = [](double b) { return b >= 0.0 && b < 1.0; };
    if (!in_unit(beta1) || !in_unit(beta2)) throw ConfigError("betas must lie in [0, 1)");
    if (!(epsilon >= 0.0) || !std::isfinite(epsilon))
        throw ConfigError("epsilon must be finite and nonnegative");
    if (!(weight_decay >= 0.0)) throw ConfigError("weight_decay must be nonnegative");
    if (kind == OptimizerKind::AdamEqualBeta && beta1 != beta2)
        throw ConfigError("adam_equal_beta requires beta1 == beta2");
    if (kind == OptimizerKind::RmsProp && beta1 != 0.0)
        throw ConfigError("rmsprop requires beta1 == 0");
    if (clip.cclip_bound && kind != OptimizerKind::Sgd)
        throw ConfigError("cclip is only defined for sgd");
    clip.validate();
}

OptimizerConfig OptimizerConfig::sgd(double beta) {
    OptimizerConfig c;
    c.kind = OptimizerKind::Sgd;
    c.beta1 = beta;
    c.beta2 = 0.0;
    c.epsilon = 0.0;
    c.bias_correction = false;
    return c;
}

OptimizerConfig OptimizerConfig::sign_sgd() {
    OptimizerConfig c = sgd(0.0);
    c.kind = OptimizerKind::SignSgd;
    return c;
}

OptimizerConfig OptimizerConfig::signum(double beta) {
    OptimizerConfig c = sgd(beta);
    c.kind = OptimizerKind::Signum;
    return c;
}

OptimizerConfig OptimizerConfig::ema_sign(double beta) {
    OptimizerConfig c = sgd(beta);
    c.kind = OptimizerKind::EmaSign;
    return c;
}

OptimizerConfig OptimizerConfig::rmsprop(double beta2) {
    OptimizerConfig c;
    c.kind = OptimizerKind::RmsProp;
    c.beta1 = 0.0;
    c.beta2 = beta2;
    return c;
}

OptimizerConfig OptimizerConfig::adam(double beta1, double beta2) {
    OptimizerConfig c;
    c.kind = OptimizerKind::Adam;
    c.beta1 = beta1;
    c.beta2 = beta2;
    return c;
}

OptimizerConfig OptimizerConfig::adam_equal_beta(double beta) {
    OptimizerConfig c = adam(beta, beta);
    c.kind = OptimizerKind::AdamEqualBeta;
    return c;
}

OptimizerState init_state(const OptimizerConfig& config, std::size_t dim) {
    config.validate();
    OptimizerState s;
    s.m = EmaBuffer(dim, config.beta1, config.init_mode);
    if (uses_second_moment(config.kind)) s.v = EmaBuffer(dim, config.beta2, config.init_mode);
    if (config.kind == OptimizerKind::AdamEqualBeta) s.delta.assign(dim, 0.0);
    return s;
}

UpdateTrace compute_update(const OptimizerConfig& config, OptimizerState& state,
                           std::span<const double> g_raw) {
    const std::size_t n = state.m.size();
    if (g_raw.size() != n)
        throw DimensionError("direction: gradient has " + std::to_string(g_raw.size()) +
                             " entries, state has " + std::to_string(n));
    if (!all_finite(g_raw)) throw NumericError("direction: non-finite gradient");
    if (config.kind == OptimizerKind::AdamEqualBeta && config.beta1 != config.beta2)
        throw ConfigError("adam_equal_beta requires beta1 == beta2");

    UpdateTrace trace;
    trace.grad_norm = l2_norm(g_raw);

    // Sign is invariant to positive rescaling, so Gclip cannot affect EmaSign.
    Vec g(g_raw.begin(), g_raw.end());
    if (config.clip.gclip_threshold && config.kind != OptimizerKind::EmaSign)
        g = gclip(g, *config.clip.gclip_threshold);

    Vec& d = trace.direction;
    d.assign(n, 0.0);

    switch (config.kind) {
    case OptimizerKind::Sgd: {
        state.m.update(g);
        d = state.m.value;
        if (config.clip.cclip_bound) d = cclip(d, *config.clip.cclip_bound);
        break;
    }
    case OptimizerKind::SignSgd:
        state.m.update(g);
        for (std::size_t i = 0; i < n; ++i) d[i] = sign(g[i]);
        break;
    case OptimizerKind::Signum:
        state.m.update(g);
        for (std::size_t i = 0; i < n; ++i)
            d[i] = mollified_sign(state.m.value[i], config.epsilon, config.epsilon_placement);
        break;
    case OptimizerKind::EmaSign: {
        Vec s(n);
        for (std::size_t i = 0; i < n; ++i) s[i] = sign(g[i]);
        state.m.update(s);
        d = state.m.value;
        break;
    }
    case OptimizerKind::RmsProp:
    case OptimizerKind::Adam: {
        Vec g2(n);
        for (std::size_t i = 0; i < n; ++i) g2[i] = g[i] * g[i];
        state.m.update(g);
        state.v.update(g2);
        double c1 = 1.0;
        double c2 = 1.0;
        if (config.bias_correction) {
            c1 = bias_correction_factor(config.beta1, state.m.step);
            c2 = bias_correction_factor(config.beta2, state.v.step);
        }
        trace.delta_snapshot.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double m_hat = state.m.value[i] / c1;
            const double v_hat = state.v.value[i] / c2;
            d[i] = adam_ratio(m_hat, v_hat, config.epsilon, config.epsilon_placement);
            trace.delta_snapshot[i] = std::max(v_hat - m_hat * m_hat, 0.0);
        }
        break;
    }
    case OptimizerKind::AdamEqualBeta: {
        const double beta = config.beta1;
        const bool seed_step = state.m.step == 0 && state.m.init_mode == InitMode::FirstSampleInit;
        if (!seed_step) {
            for (std::size_t i = 0; i < n; ++i) {
                const double innovation = state.m.value[i] - g[i];
                state.delta[i] = beta * state.delta[i] + beta * (1.0 - beta) * innovation * innovation;
            }
        }
        state.m.update(g);
        const double c = config.bias_correction ? bias_correction_factor(beta, state.m.step) : 1.0;
        trace.delta_snapshot.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double m = state.m.value[i];
            const double m_hat = m / c;
            // m_hat^2 + delta_hat == v_hat == (m^2 + delta) / c
            const double second = (m * m + state.delta[i]) / c;
            d[i] = adam_ratio(m_hat, second, config.epsilon, config.epsilon_placement);
            trace.delta_snapshot[i] = config.bias_correction
                                          ? std::max(second - m_hat * m_hat, 0.0)
                                          : state.delta[i];
        }
        break;
    }
    }
    ++state.step;
    return trace;
}

Vec direction(const OptimizerConfig& config, OptimizerState& state, std::span<const double> g) {
    return compute_update(config, state, g).direction;
}

Vec apply_step(std::span<const double> w, std::span<const double> d, double lr,
               double weight_decay) {
    if (w.size() != d.size()) throw DimensionError("apply_step: shape mismatch");
    Vec out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        out[i] = w[i] - lr * weight_decay * w[i] - lr * d[i];
    return out;
}

} // namespace adamlab
