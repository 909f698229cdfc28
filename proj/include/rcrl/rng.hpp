#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>

namespace rcrl {

inline uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Deterministic RNG. mt19937_64 output is pinned by the standard; all
// transforms below are hand-rolled so streams never depend on libstdc++'s
// distribution implementations.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed), eng_(splitmix64(seed)) {}

    uint64_t seed() const { return seed_; }

    // Independent child stream, stable under reordering of draws on the parent.
    Rng child(uint64_t stream) const { return Rng(splitmix64(seed_ ^ (0xd1b54a32d192ed03ULL * (stream + 1)))); }

    uint64_t next_u64() { return eng_(); }

    // Uniform in [0, 1).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Rate-1 exponential.
    double exponential() {
        double u;
        do {
            u = uniform01();
        } while (u <= 0.0);
        return -std::log(u);
    }

    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        double u1, u2;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        u2 = uniform01();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        have_cached_ = true;
        return r * std::cos(a);
    }

    // Sample an index from a probability vector (CDF walk; last index absorbs
    // any roundoff residual).
    int categorical(std::span<const double> probs) {
        double u = uniform01();
        double acc = 0.0;
        int n = static_cast<int>(probs.size());
        for (int i = 0; i < n; ++i) {
            acc += probs[i];
            if (u < acc) return i;
        }
        return n - 1;
    }

private:
    uint64_t seed_;
    std::mt19937_64 eng_;
    bool have_cached_ = false;
    double cached_ = 0.0;
};

}  // namespace rcrl
