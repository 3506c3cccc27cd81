#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

namespace parxad {

/// Deterministic RNG used by datagen and tests. The engine is std::mt19937_64
/// (bit-reproducible everywhere); distributions are implemented here instead
/// of <random>'s, whose output differs across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(mix(seed)) {}

    /// Independent stream for one meter: outputs do not depend on how the
    /// fleet is scheduled across threads.
    static Rng for_stream(std::uint64_t seed, std::string_view name) {
        std::uint64_t h = 1469598103934665603ull; // FNV-1a
        for (char c : name) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return Rng(mix(seed) ^ h);
    }

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
    }

    /// Standard normal via Box-Muller.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    double normal(double mu, double sd) { return mu + sd * normal(); }

private:
    static std::uint64_t mix(std::uint64_t x) { // splitmix64 finalizer
        x += 0x9e3779b97f4a7c15ull;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
        return x ^ (x >> 31);
    }

    std::mt19937_64 eng_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace parxad
