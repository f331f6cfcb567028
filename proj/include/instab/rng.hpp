#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace instab {

/// SplitMix64 step; used for seed derivation only.
inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent substream seed from a root seed and a path of
/// indices, e.g. derive_seed(root, {sweep_index, rep_index}).
inline std::uint64_t derive_seed(std::uint64_t root,
                                 std::initializer_list<std::uint64_t> path) {
    std::uint64_t s = root;
    std::uint64_t mixed = splitmix64(s);
    for (std::uint64_t id : path) {
        s = mixed ^ (id + 0x9e3779b97f4a7c15ULL);
        mixed = splitmix64(s);
    }
    return mixed;
}

/// Random stream used throughout the engine. Substreams are derived by
/// hashing the seed with index paths, so replications and branches are
/// independent and reproducible regardless of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

    std::uint64_t seed() const { return seed_; }

    Rng substream(std::uint64_t a, std::uint64_t b = 0) const {
        return Rng(derive_seed(seed_, {a, b}));
    }

    std::uint64_t next() { return gen_(); }

    /// Uniform in [0, 1).
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    /// Uniform in (0, 1).
    double uniform_open() {
        double u;
        do { u = uniform(); } while (u == 0.0);
        return u;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    bool bernoulli(double p) { return uniform() < p; }

    /// Exponential with the given rate (mean 1/rate).
    double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

    /// Uniform index in [0, n).
    std::size_t uniform_index(std::size_t n) {
        std::uniform_int_distribution<std::size_t> dist(0, n - 1);
        return dist(gen_);
    }

private:
    std::uint64_t seed_;
    std::mt19937_64 gen_;
};

} // namespace instab
