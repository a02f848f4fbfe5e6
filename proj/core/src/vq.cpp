#include "gsvq/vq.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <iostream>
#include <limits>
#include <stdexcept>

#include "gsvq/parallel.hpp"

namespace gsvq {

namespace {

constexpr std::size_t kChunk = 2048; // fixed chunking for order-stable reductions

double squared_distance(const float* a, const float* b, std::uint32_t dim) {
    double acc = 0.0;
    for (std::uint32_t i = 0; i < dim; ++i) {
        const double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        acc += d * d;
    }
    return acc;
}

void check_dim(std::size_t got, std::uint32_t want) {
    if (got != want) {
        throw std::invalid_argument("vector dimension " + std::to_string(got) +
                                    " does not match codebook dim " + std::to_string(want));
    }
}

} // namespace

NearestHit nearest_entry(const Codebook& cb, std::span<const float> t) {
    check_dim(t.size(), cb.dim);
    if (cb.entries == 0) throw std::invalid_argument("empty codebook");
    std::uint32_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (std::uint32_t k = 0; k < cb.entries; ++k) {
        const double d2 = squared_distance(t.data(), cb.row(k), cb.dim);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = k;
        }
    }
    return {best, std::sqrt(best_d2)};
}

QuantizationResult quantize_hard(Codebook& cb, std::span<const float> t) {
    const NearestHit hit = nearest_entry(cb, t);
    ++cb.usage[hit.index];
    QuantizationResult out;
    out.index = hit.index;
    out.distance = hit.distance;
    out.hard.assign(cb.row(hit.index), cb.row(hit.index) + cb.dim);
    return out;
}

NsvqResult quantize_nsvq(Codebook& cb, std::span<const float> t, Rng& rng) {
    const std::uint32_t dim = cb.dim;
    NsvqResult out;
    const NearestHit hit = nearest_entry(cb, t);
    ++cb.usage[hit.index];
    out.index = hit.index;
    out.distance = hit.distance;

    out.unit_noise.resize(dim);
    double nrm = 0.0;
    do {
        nrm = 0.0;
        for (std::uint32_t i = 0; i < dim; ++i) {
            out.unit_noise[i] = rng.gaussian();
            nrm += out.unit_noise[i] * out.unit_noise[i];
        }
        nrm = std::sqrt(nrm);
    } while (nrm == 0.0); // probability-zero degenerate draw
    for (std::uint32_t i = 0; i < dim; ++i) out.unit_noise[i] /= nrm;

    out.surrogate.resize(dim);
    for (std::uint32_t i = 0; i < dim; ++i) {
        out.surrogate[i] = static_cast<double>(t[i]) + hit.distance * out.unit_noise[i];
    }
    return out;
}

void nsvq_surrogate(std::span<const double> t, std::span<const double> z,
                    std::span<const double> unit_noise, std::span<double> out) {
    const std::size_t dim = t.size();
    if (z.size() != dim || unit_noise.size() != dim || out.size() != dim) {
        throw std::invalid_argument("nsvq_surrogate: dimension mismatch");
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double d = t[i] - z[i];
        d2 += d * d;
    }
    const double dist = std::sqrt(d2);
    for (std::size_t i = 0; i < dim; ++i) out[i] = t[i] + dist * unit_noise[i];
}

void nsvq_backward(std::span<const double> t, std::span<const double> z_star,
                   std::span<const double> unit_noise, std::span<const double> upstream,
                   std::span<double> grad_t, std::span<double> grad_z) {
    const std::size_t dim = t.size();
    if (z_star.size() != dim || unit_noise.size() != dim || upstream.size() != dim ||
        grad_t.size() != dim || grad_z.size() != dim) {
        throw std::invalid_argument("nsvq_backward: dimension mismatch");
    }
    double d2 = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
        const double d = t[i] - z_star[i];
        d2 += d * d;
    }
    const double dist = std::sqrt(d2);
    if (dist == 0.0) {
        // 0/0 in the formula; defined as pass-through.
        std::copy(upstream.begin(), upstream.end(), grad_t.begin());
        std::fill(grad_z.begin(), grad_z.end(), 0.0);
        return;
    }
    double u_dot_up = 0.0;
    for (std::size_t i = 0; i < dim; ++i) u_dot_up += unit_noise[i] * upstream[i];
    for (std::size_t i = 0; i < dim; ++i) {
        const double g = (t[i] - z_star[i]) / dist;
        grad_t[i] = upstream[i] + g * u_dot_up;
        grad_z[i] = -g * u_dot_up;
    }
}

namespace {

// Assignment scan against double-precision centroids. Returns per-point
// cluster ids and squared distances; objective as ordered chunk sum.
double assign_points(std::span<const float> data, std::size_t count, std::uint32_t dim,
                     const std::vector<double>& centroids, std::uint32_t k,
                     std::vector<std::uint32_t>& assign, std::vector<double>& dist2) {
    std::vector<double> chunk_obj(num_chunks(count, kChunk), 0.0);
    parallel_for_chunks(count, kChunk, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        double obj = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const float* x = data.data() + i * dim;
            std::uint32_t best = 0;
            double best_d2 = std::numeric_limits<double>::infinity();
            for (std::uint32_t c = 0; c < k; ++c) {
                const double* z = centroids.data() + std::size_t(c) * dim;
                double d2 = 0.0;
                for (std::uint32_t j = 0; j < dim; ++j) {
                    const double d = static_cast<double>(x[j]) - z[j];
                    d2 += d * d;
                }
                if (d2 < best_d2) {
                    best_d2 = d2;
                    best = c;
                }
            }
            assign[i] = best;
            dist2[i] = best_d2;
            obj += best_d2;
        }
        chunk_obj[chunk] = obj;
    });
    double total = 0.0;
    for (const double o : chunk_obj) total += o;
    return total;
}

} // namespace

Codebook kmeans_init(std::span<const float> data, std::size_t count, std::uint32_t dim,
                     std::uint32_t entries, Rng& rng, int max_iters, double tol,
                     std::vector<double>* objective_trace) {
    if (count == 0) throw std::invalid_argument("kmeans_init: empty data");
    if (entries == 0) throw std::invalid_argument("kmeans_init: zero entries");
    if (data.size() != count * dim) throw std::invalid_argument("kmeans_init: bad data extent");
    if (objective_trace) objective_trace->clear();

    Codebook cb = Codebook::zeros(entries, dim);

    if (entries >= count) {
        for (std::size_t i = 0; i < count; ++i) {
            std::memcpy(cb.row(static_cast<std::uint32_t>(i)), data.data() + i * dim,
                        dim * sizeof(float));
        }
        if (entries > count) {
            std::cerr << "[gsvq] warning: codebook entries (" << entries
                      << ") exceed data count (" << count
                      << "); surplus entries duplicated from random points\n";
            for (std::uint32_t k = static_cast<std::uint32_t>(count); k < entries; ++k) {
                const std::size_t pick = rng.uniform_index(count);
                std::memcpy(cb.row(k), data.data() + pick * dim, dim * sizeof(float));
            }
        }
        if (objective_trace) objective_trace->push_back(0.0);
        return cb;
    }

    // k-means++ seeding.
    std::vector<double> centroids(std::size_t(entries) * dim, 0.0);
    std::vector<double> dist2(count, 0.0);
    const std::size_t first = rng.uniform_index(count);
    for (std::uint32_t j = 0; j < dim; ++j) centroids[j] = data[first * dim + j];
    parallel_for_chunks(count, kChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            double d2 = 0.0;
            for (std::uint32_t j = 0; j < dim; ++j) {
                const double d = static_cast<double>(data[i * dim + j]) - centroids[j];
                d2 += d * d;
            }
            dist2[i] = d2;
        }
    });
    for (std::uint32_t k = 1; k < entries; ++k) {
        double total = 0.0;
        for (std::size_t i = 0; i < count; ++i) total += dist2[i];
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.uniform_index(count);
        } else {
            const double r = rng.uniform() * total;
            double acc = 0.0;
            pick = count - 1;
            for (std::size_t i = 0; i < count; ++i) {
                acc += dist2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        }
        double* zk = centroids.data() + std::size_t(k) * dim;
        for (std::uint32_t j = 0; j < dim; ++j) zk[j] = data[pick * dim + j];
        parallel_for_chunks(count, kChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                double d2 = 0.0;
                for (std::uint32_t j = 0; j < dim; ++j) {
                    const double d = static_cast<double>(data[i * dim + j]) - zk[j];
                    d2 += d * d;
                }
                if (d2 < dist2[i]) dist2[i] = d2;
            }
        });
    }

    // Lloyd iterations.
    std::vector<std::uint32_t> assign(count, 0);
    std::vector<double> sums(std::size_t(entries) * dim);
    std::vector<std::size_t> counts(entries);
    for (int iter = 0; iter < max_iters; ++iter) {
        const double objective = assign_points(data, count, dim, centroids, entries, assign, dist2);
        if (objective_trace) objective_trace->push_back(objective);

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < count; ++i) {
            double* s = sums.data() + std::size_t(assign[i]) * dim;
            const float* x = data.data() + i * dim;
            for (std::uint32_t j = 0; j < dim; ++j) s[j] += x[j];
            ++counts[assign[i]];
        }

        double max_move2 = 0.0;
        for (std::uint32_t k = 0; k < entries; ++k) {
            if (counts[k] == 0) continue;
            double* zk = centroids.data() + std::size_t(k) * dim;
            const double* s = sums.data() + std::size_t(k) * dim;
            double move2 = 0.0;
            for (std::uint32_t j = 0; j < dim; ++j) {
                const double nv = s[j] / static_cast<double>(counts[k]);
                const double d = nv - zk[j];
                move2 += d * d;
                zk[j] = nv;
            }
            max_move2 = std::max(max_move2, move2);
        }

        // Reseed empty clusters to the currently farthest point.
        for (std::uint32_t k = 0; k < entries; ++k) {
            if (counts[k] != 0) continue;
            std::size_t far = 0;
            double far_d2 = -1.0;
            for (std::size_t i = 0; i < count; ++i) {
                if (dist2[i] > far_d2) {
                    far_d2 = dist2[i];
                    far = i;
                }
            }
            double* zk = centroids.data() + std::size_t(k) * dim;
            for (std::uint32_t j = 0; j < dim; ++j) zk[j] = data[far * dim + j];
            dist2[far] = 0.0; // claimed; steer later empties elsewhere
            max_move2 = std::numeric_limits<double>::infinity();
        }

        if (std::sqrt(max_move2) < tol) break;
    }

    for (std::uint32_t k = 0; k < entries; ++k) {
        float* dst = cb.row(k);
        const double* src = centroids.data() + std::size_t(k) * dim;
        for (std::uint32_t j = 0; j < dim; ++j) dst[j] = static_cast<float>(src[j]);
    }
    return cb;
}

std::uint32_t replace_inactive(Codebook& cb, std::uint64_t threshold, Rng& rng, double jitter) {
    std::vector<std::uint32_t> active;
    active.reserve(cb.entries);
    for (std::uint32_t k = 0; k < cb.entries; ++k) {
        if (cb.usage[k] >= threshold) active.push_back(k);
    }
    if (active.empty()) return 0;

    std::uint32_t replaced = 0;
    for (std::uint32_t k = 0; k < cb.entries; ++k) {
        if (cb.usage[k] >= threshold) continue;
        const std::uint32_t src = active[rng.uniform_index(active.size())];
        std::memcpy(cb.row(k), cb.row(src), cb.dim * sizeof(float));
        if (jitter > 0.0) {
            float* row = cb.row(k);
            for (std::uint32_t j = 0; j < cb.dim; ++j) {
                row[j] += static_cast<float>(jitter * rng.gaussian());
            }
        }
        ++replaced;
    }
    std::fill(cb.usage.begin(), cb.usage.end(), 0);
    return replaced;
}

} // namespace gsvq
