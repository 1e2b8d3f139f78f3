#include "spgi/rng.hpp"

#include <cmath>
#include <stdexcept>

namespace spgi {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t Rng::mix(std::uint64_t z) {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t Rng::derive_key(std::uint64_t seed,
                              std::initializer_list<std::uint64_t> path) {
    std::uint64_t key = mix(seed + kGolden);
    for (std::uint64_t p : path) {
        key = mix(key ^ mix(p + kGolden));
    }
    return key;
}

std::uint64_t Rng::next_u64() {
    state_ += kGolden;
    return mix(state_);
}

double Rng::next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::next_unit_open_low() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
}

double Rng::next_gaussian() {
    const double u1 = next_unit_open_low();
    const double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

std::uint64_t Rng::next_poisson(double lambda) {
    if (lambda < 0.0 || !std::isfinite(lambda)) {
        throw std::invalid_argument("poisson mean must be finite and nonnegative");
    }
    if (lambda == 0.0) return 0;
    if (lambda < 30.0) {
        // Knuth sequential search on the product of uniforms.
        const double limit = std::exp(-lambda);
        std::uint64_t k = 0;
        double prod = next_unit_open_low();
        while (prod > limit) {
            ++k;
            prod *= next_unit_open_low();
        }
        return k;
    }
    // Hormann's PTRS transformed rejection.
    const double slam = std::sqrt(lambda);
    const double loglam = std::log(lambda);
    const double b = 0.931 + 2.53 * slam;
    const double a = -0.059 + 0.02483 * b;
    const double invalpha = 1.1239 + 1.1328 / (b - 3.4);
    const double vr = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u = next_unit() - 0.5;
        const double v = next_unit_open_low();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + lambda + 0.43);
        if (us >= 0.07 && v <= vr) return static_cast<std::uint64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        if (std::log(v * invalpha / (a / (us * us) + b)) <=
            -lambda + kf * loglam - std::lgamma(kf + 1.0)) {
            return static_cast<std::uint64_t>(kf);
        }
    }
}

Rng rng_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return Rng(Rng::derive_key(seed, path));
}

}  // namespace spgi
