#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <string_view>

namespace klucrl {

/// splitmix64 finalizer; used both as a seed mixer and to derive
/// independent streams from (master seed, replication, stream tag).
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based stream split: one master seed expands deterministically
/// into per-replication (environment, agent, reward-noise, ...) streams.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t counter,
                                 std::string_view stream) {
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ splitmix64(counter));
    for (char c : stream) h = splitmix64(h ^ static_cast<std::uint64_t>(static_cast<unsigned char>(c)));
    return h;
}

/// Seeded generator with portable derived draws. The raw mt19937_64 output
/// sequence is fixed by the standard; all distribution mappings below are
/// hand-rolled so that traces do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : engine_(splitmix64(seed)) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    bool bernoulli(double p) { return uniform01() < p; }

    /// Index drawn from an unnormalized nonnegative weight vector.
    std::size_t categorical(std::span<const double> weights) {
        double total = 0.0;
        for (double w : weights) total += w;
        double u = uniform01() * total;
        double acc = 0.0;
        for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
            acc += weights[i];
            if (u < acc) return i;
        }
        return weights.empty() ? 0 : weights.size() - 1;
    }

    /// Exponential(1); building block for Dirichlet(1,...,1) rows.
    double exponential() {
        double u;
        do { u = uniform01(); } while (u <= 0.0);
        return -std::log(u);
    }

    std::uint64_t uniform_int(std::uint64_t n) {
        // rejection sampling keeps the draw exactly uniform
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
        std::uint64_t x;
        do { x = engine_(); } while (x >= limit);
        return x % n;
    }

private:
    std::mt19937_64 engine_;
};

} // namespace klucrl
