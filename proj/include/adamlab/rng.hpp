#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace adamlab {

/// Seedable generator whose output is identical on every conforming platform.
/// The engine is std::mt19937_64; all draws are derived from its raw 64-bit
/// output here because the std distributions are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0, n), n >= 1, unbiased by rejection.
    std::uint64_t index(std::uint64_t n);

    /// Standard normal via the Marsaglia polar method.
    double normal();

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// Sub-stream seed for one run: splitmix64(seed ^ fnv1a64(config_id) ^ splitmix64(run_index)).
std::uint64_t derive_seed(std::uint64_t seed, std::string_view config_id, std::uint64_t run_index);

} // namespace adamlab
