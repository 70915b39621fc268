#include "adamlab/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace adamlab {

namespace {

void check_beta(double beta) {
    if (!(beta >= 0.0 && beta < 1.0))
        throw PreconditionError("beta must lie in [0, 1), got " + std::to_string(beta));
}

} // namespace

EmaBuffer::EmaBuffer(std::size_t dim, double b, InitMode mode)
    : value(dim, 0.0), beta(b), step(0), init_mode(mode) {
    check_beta(beta);
}

void EmaBuffer::update(std::span<const double> sample) {
    if (sample.size() != value.size())
        throw DimensionError("ema_update: sample has " + std::to_string(sample.size()) +
                             " entries, buffer has " + std::to_string(value.size()));
    if (step == 0 && init_mode == InitMode::FirstSampleInit) {
        std::copy(sample.begin(), sample.end(), value.begin());
    } else {
        for (std::size_t i = 0; i < value.size(); ++i)
            value[i] = beta * value[i] + (1.0 - beta) * sample[i];
    }
    ++step;
}

EmaBuffer ema_update(EmaBuffer buf, std::span<const double> sample) {
    buf.update(sample);
    return buf;
}

double bias_correction_factor(double beta, std::size_t step) {
    check_beta(beta);
    if (step == 0) throw PreconditionError("bias_correct: step must be >= 1");
    return 1.0 - std::pow(beta, static_cast<double>(step));
}

Vec bias_correct(std::span<const double> value, double beta, std::size_t step) {
    const double c = bias_correction_factor(beta, step);
    Vec out(value.begin(), value.end());
    for (auto& x : out) x /= c;
    return out;
}

Vec gclip(std::span<const double> g, double threshold) {
    if (!(threshold > 0.0)) throw PreconditionError("gclip: threshold must be positive");
    Vec out(g.begin(), g.end());
    const double norm = l2_norm(g);
    if (norm > threshold) {
        const double scale = threshold / norm;
        for (auto& x : out) x *= scale;
    }
    return out;
}

Vec cclip(std::span<const double> v, double bound) {
    if (!(bound > 0.0)) throw PreconditionError("cclip: bound must be positive");
    Vec out(v.size());
    std::transform(v.begin(), v.end(), out.begin(),
                   [bound](double x) { return std::clamp(x, -bound, bound); });
    return out;
}

void ClipConfig::validate() const {
    if (gclip_threshold && !(*gclip_threshold > 0.0))
        throw ConfigError("gclip threshold must be positive when enabled");
    if (cclip_bound && !(*cclip_bound > 0.0))
        throw ConfigError("cclip bound must be positive when enabled");
}

void Schedule::validate() const {
    if (!(peak_lr >= 0.0) || !std::isfinite(peak_lr))
        throw ConfigError("schedule: peak_lr must be finite and nonnegative");
    if (!(floor_lr >= 0.0)) throw ConfigError("schedule: floor_lr must be nonnegative");
    if (total_steps == 0) throw ConfigError("schedule: total_steps must be positive");
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0))
        throw ConfigError("schedule: warmup_fraction must lie in [0, 1)");
}

std::size_t Schedule::warmup_steps() const {
    return static_cast<std::size_t>(std::llround(warmup_fraction * static_cast<double>(total_steps)));
}

double lr_at(const Schedule& sched, std::size_t step) {
    if (step > sched.total_steps)
        throw PreconditionError("lr_at: step " + std::to_string(step) + " beyond total_steps " +
                                std::to_string(sched.total_steps));
    const std::size_t warm = sched.warmup_steps();
    if (step < warm)
        return sched.peak_lr * static_cast<double>(step) / static_cast<double>(warm);
    if (sched.total_steps == warm) return sched.peak_lr;
    const double progress =
        static_cast<double>(step - warm) / static_cast<double>(sched.total_steps - warm);
    return sched.floor_lr +
           (sched.peak_lr - sched.floor_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

std::vector<double> beta_grid(double beta_base, std::span<const double> kappas) {
    check_beta(beta_base);
    std::vector<double> out;
    out.reserve(kappas.size());
    for (double kappa : kappas) {
        if (!(kappa > 0.0)) throw PreconditionError("beta_grid: kappa must be positive");
        const double beta = 1.0 - kappa * (1.0 - beta_base);
        if (!(beta >= 0.0 && beta < 1.0))
            throw PreconditionError("beta_grid: kappa " + std::to_string(kappa) +
                                    " maps outside [0, 1)");
        out.push_back(beta);
    }
    return out;
}

std::vector<double> default_kappas() {
    std::vector<double> k;
    for (int e = -5; e <= 2; ++e) k.push_back(std::ldexp(1.0, e));
    return k;
}

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

double l2_norm(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double linf_norm(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

} // namespace adamlab
