#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "gsvq/rng.hpp"

namespace gsvq {

// Codebook for one attribute group: entries x dim row-major float32 vectors
// plus per-entry usage counters accumulated since the last replacement.
struct Codebook {
    std::vector<float> vectors;
    std::uint32_t entries = 0;
    std::uint32_t dim = 0;
    std::vector<std::uint64_t> usage;

    static Codebook zeros(std::uint32_t entries, std::uint32_t dim) {
        Codebook cb;
        cb.entries = entries;
        cb.dim = dim;
        cb.vectors.assign(std::size_t(entries) * dim, 0.0f);
        cb.usage.assign(entries, 0);
        return cb;
    }

    const float* row(std::uint32_t k) const { return vectors.data() + std::size_t(k) * dim; }
    float* row(std::uint32_t k) { return vectors.data() + std::size_t(k) * dim; }

    bool operator==(const Codebook&) const = default;
};

struct QuantizationResult {
    std::uint32_t index = 0;
    std::vector<float> hard; // copy of the selected codebook vector
    double distance = 0.0;   // ||t - vectors[index]||_2
};

struct NearestHit {
    std::uint32_t index = 0;
    double distance = 0.0;
};

// Exhaustive nearest-entry scan, double accumulation, ties to the lowest
// index. Pure: does not touch usage.
NearestHit nearest_entry(const Codebook& cb, std::span<const float> t);

// Nearest-entry quantization; increments usage[index].
QuantizationResult quantize_hard(Codebook& cb, std::span<const float> t);

// Noise-substitution surrogate: surrogate = t + ||t - z*|| * e/||e||,
// e ~ N(0, I). Kept in double so the norm identity
// ||surrogate - t|| == hard distance holds to ~1e-15.
struct NsvqResult {
    std::vector<double> surrogate;
    std::vector<double> unit_noise;
    std::uint32_t index = 0;
    double distance = 0.0;
};

NsvqResult quantize_nsvq(Codebook& cb, std::span<const float> t, Rng& rng);

// Forward map of the surrogate with fixed noise; used by gradient checks.
void nsvq_surrogate(std::span<const double> t, std::span<const double> z,
                    std::span<const double> unit_noise, std::span<double> out);

// Analytic Jacobian-transpose products of the surrogate map.
//   grad_t = upstream + g * (u . upstream)
//   grad_z = -g * (u . upstream)        with g = (t - z)/||t - z||.
// At t == z the map is defined as pass-through: grad_t = upstream, grad_z = 0.
void nsvq_backward(std::span<const double> t, std::span<const double> z_star,
                   std::span<const double> unit_noise, std::span<const double> upstream,
                   std::span<double> grad_t, std::span<double> grad_z);

// Lloyd's algorithm with k-means++ seeding over `count` row-major vectors.
// Empty clusters are reseeded to the point farthest from its centroid. If
// entries >= count every point becomes a centroid and the surplus is
// duplicated from random points (with a logged warning).
// objective_trace, when given, receives the assignment objective (sum of
// squared distances) of each iteration.
Codebook kmeans_init(std::span<const float> data, std::size_t count, std::uint32_t dim,
                     std::uint32_t entries, Rng& rng, int max_iters = 25, double tol = 1e-7,
                     std::vector<double>* objective_trace = nullptr);

// Overwrites every entry with usage < threshold by a uniformly sampled active
// entry (usage >= threshold), optionally jittered, then resets all counters.
// If no entry is active nothing happens and 0 is returned.
std::uint32_t replace_inactive(Codebook& cb, std::uint64_t threshold, Rng& rng,
                               double jitter = 0.0);

} // namespace gsvq
