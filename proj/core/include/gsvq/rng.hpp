#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gsvq {

// splitmix64 finalizer; used to derive independent stream seeds from one run seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

// Seedable random source backed by mt19937_64. Distributions are implemented
// here instead of <random> because the standard leaves their sequences
// implementation-defined and every training run must be reproducible from one
// seed. The only cross-platform caveat is libm (log/cos/sin) in gaussian().
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Independent stream derived from (seed, stream id).
    static Rng fork(std::uint64_t seed, std::uint64_t stream) {
        return Rng(mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x517cc1b727220a95ull)));
    }

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1), 53-bit resolution.
    double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased integer in [0, bound); bound must be nonzero.
    std::uint64_t uniform_index(std::uint64_t bound) {
        const std::uint64_t limit = bound * ((~std::uint64_t{0}) / bound);
        std::uint64_t v;
        do {
            v = engine_();
        } while (v >= limit);
        return v % bound;
    }

    // Standard normal via Box-Muller; second value cached.
    double gaussian() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 6.283185307179586476925286766559 * u2;
        cached_ = r * std::sin(a);
        has_cached_ = true;
        return r * std::cos(a);
    }

    // Fisher-Yates.
    template <typename T>
    void shuffle(T* data, std::size_t n) {
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(data[i - 1], data[j]);
        }
    }

private:
    std::mt19937_64 engine_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

} // namespace gsvq
