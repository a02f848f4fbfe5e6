#include "gsvq/compressor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "gsvq/errors.hpp"
#include "gsvq/parallel.hpp"
#include "gsvq/renderer.hpp"
#include "gsvq/rng.hpp"

namespace gsvq {

namespace {

constexpr std::size_t kChunk = 1024;

// Stream ids for deriving independent RNG streams from the run seed. Each
// group keeps its own streams so toggling render_loss cannot perturb the
// scaling/rotation training sequences.
enum StreamId : std::uint64_t {
    kStreamKmeans = 0x10,  // +group
    kStreamNoise = 0x20,   // +group
    kStreamReplace = 0x30, // +group
    kStreamShuffle = 0x40,
    kStreamFinetune = 0x50,
};

bool power_of_two(std::uint32_t v) { return v >= 1 && std::has_single_bit(v); }

double sigmoid_d(double x) { return 1.0 / (1.0 + std::exp(-x)); }

struct GroupView {
    const float* row(std::size_t i) const { return data + i * dim; }
    const float* data;
    std::size_t count;
    std::uint32_t dim;
};

// Deterministic epoch sampler: without replacement within an epoch,
// reshuffled per epoch, short tail batch at epoch end.
class BatchSampler {
public:
    BatchSampler(std::size_t n, std::size_t batch, Rng rng)
        : indices_(n), batch_(std::min(batch, n)), pos_(n), rng_(rng) {
        std::iota(indices_.begin(), indices_.end(), std::uint32_t{0});
    }

    std::span<const std::uint32_t> next() {
        if (pos_ >= indices_.size()) {
            rng_.shuffle(indices_.data(), indices_.size());
            pos_ = 0;
        }
        const std::size_t take = std::min(batch_, indices_.size() - pos_);
        std::span<const std::uint32_t> out(indices_.data() + pos_, take);
        pos_ += take;
        return out;
    }

private:
    std::vector<std::uint32_t> indices_;
    std::size_t batch_;
    std::size_t pos_;
    Rng rng_;
};

// Sparse per-step gradient buffer over codebook entries.
class EntryGradients {
public:
    void reset(std::uint32_t entries, std::uint32_t dim) {
        dim_ = dim;
        grad_.assign(std::size_t(entries) * dim, 0.0);
        touched_.clear();
        seen_.assign(entries, false);
    }

    void add(std::uint32_t k, std::span<const double> g) {
        if (!seen_[k]) {
            seen_[k] = true;
            touched_.push_back(k);
        }
        double* dst = grad_.data() + std::size_t(k) * dim_;
        for (std::uint32_t j = 0; j < dim_; ++j) dst[j] += g[j];
    }

    // z_k -= lr * grad_k for touched entries, then clears them.
    void apply(Codebook& cb, double lr) {
        for (const std::uint32_t k : touched_) {
            float* row = cb.row(k);
            double* g = grad_.data() + std::size_t(k) * dim_;
            for (std::uint32_t j = 0; j < dim_; ++j) {
                row[j] = static_cast<float>(row[j] - lr * g[j]);
                g[j] = 0.0;
            }
            seen_[k] = false;
        }
        touched_.clear();
    }

private:
    std::uint32_t dim_ = 0;
    std::vector<double> grad_;
    std::vector<std::uint32_t> touched_;
    std::vector<char> seen_;
};

void draw_unit_noise(Rng& rng, std::span<double> u) {
    double nrm = 0.0;
    do {
        nrm = 0.0;
        for (double& v : u) {
            v = rng.gaussian();
            nrm += v * v;
        }
        nrm = std::sqrt(nrm);
    } while (nrm == 0.0);
    for (double& v : u) v /= nrm;
}

std::vector<NearestHit> assign_batch(const Codebook& cb, const GroupView& view,
                                     std::span<const std::uint32_t> batch) {
    std::vector<NearestHit> hits(batch.size());
    parallel_for_chunks(batch.size(), kChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t b = begin; b < end; ++b) {
            hits[b] = nearest_entry(cb, std::span<const float>(view.row(batch[b]), view.dim));
        }
    });
    return hits;
}

std::vector<std::uint32_t> assign_all(const Codebook& cb, const GroupView& view) {
    std::vector<std::uint32_t> idx(view.count);
    parallel_for_chunks(view.count, kChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            idx[i] = nearest_entry(cb, std::span<const float>(view.row(i), view.dim)).index;
        }
    });
    return idx;
}

double group_mse(const GroupView& view, const Codebook& cb,
                 std::span<const std::uint32_t> idx) {
    const std::size_t chunks = num_chunks(view.count, kChunk);
    std::vector<double> partial(chunks, 0.0);
    parallel_for_chunks(view.count, kChunk, [&](std::size_t chunk, std::size_t begin, std::size_t end) {
        double acc = 0.0;
        for (std::size_t i = begin; i < end; ++i) {
            const float* t = view.row(i);
            const float* z = cb.row(idx[i]);
            for (std::uint32_t j = 0; j < view.dim; ++j) {
                const double d = static_cast<double>(t[j]) - static_cast<double>(z[j]);
                acc += d * d;
            }
        }
        partial[chunk] = acc;
    });
    double total = 0.0;
    for (const double p : partial) total += p;
    return view.count == 0 ? 0.0 : total / (static_cast<double>(view.count) * view.dim);
}

double active_fraction(const Codebook& cb, std::span<const std::uint32_t> idx) {
    std::vector<char> used(cb.entries, 0);
    for (const std::uint32_t k : idx) used[k] = 1;
    std::size_t n = 0;
    for (const char u : used) n += u;
    return cb.entries == 0 ? 0.0 : static_cast<double>(n) / cb.entries;
}

// One attribute-space NSVQ step on one group. Loss is the per-batch-vector
// mean of the squared surrogate error; returns it.
double attr_step(Codebook& cb, const GroupView& view, std::span<const std::uint32_t> batch,
                 Rng& noise_rng, double lr, EntryGradients& grads) {
    const std::uint32_t dim = view.dim;
    const double batch_n = static_cast<double>(batch.size());
    const auto hits = assign_batch(cb, view, batch);

    std::vector<double> t_d(dim), z_d(dim), u(dim), upstream(dim), grad_t(dim), grad_z(dim);
    double loss = 0.0;
    for (std::size_t b = 0; b < batch.size(); ++b) {
        const float* t = view.row(batch[b]);
        const std::uint32_t k = hits[b].index;
        const double dist = hits[b].distance;
        ++cb.usage[k];

        draw_unit_noise(noise_rng, u);
        const float* z = cb.row(k);
        for (std::uint32_t j = 0; j < dim; ++j) {
            t_d[j] = t[j];
            z_d[j] = z[j];
            // surrogate - t == dist * u
            upstream[j] = 2.0 * dist * u[j] / batch_n;
        }
        loss += dist * dist;
        nsvq_backward(t_d, z_d, u, upstream, grad_t, grad_z);
        grads.add(k, grad_z);
    }
    grads.apply(cb, lr);
    loss /= batch_n;
    if (!std::isfinite(loss)) throw NumericError("non-finite attribute loss during VQ training");
    return loss;
}

} // namespace

void CompressionConfig::validate() const {
    for (int g = 0; g < 4; ++g) {
        const std::uint32_t e = entries(static_cast<AttrGroup>(g));
        if (e < 2 || !power_of_two(e)) {
            throw std::invalid_argument(std::string("codebook entries for ") + kGroupNames[g] +
                                        " must be a power of two >= 2, got " + std::to_string(e));
        }
    }
    if (prune_lambda < 0.0) throw std::invalid_argument("prune_lambda must be >= 0");
    if (prune_threshold < 0.0 || prune_threshold > 1.0) {
        throw std::invalid_argument("prune_threshold must be in [0,1]");
    }
    if (prune_steps < 0 || vq_steps < 0 || finetune_steps < 0) {
        throw std::invalid_argument("step counts must be >= 0");
    }
    if (!(lr_codebook > 0.0) || !(lr_attr > 0.0) || !(lr_render > 0.0)) {
        throw std::invalid_argument("learning rates must be > 0");
    }
    if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
    if (replace_period < 0) throw std::invalid_argument("replace_period must be >= 0");
    if (kmeans_iters < 1) throw std::invalid_argument("kmeans_iters must be >= 1");
}

void apply_size_name(CompressionConfig& cfg, const std::string& name) {
    std::string s = name;
    if (!s.empty() && (s.back() == 'k' || s.back() == 'K')) s.pop_back();
    double v = 0.0;
    try {
        std::size_t used = 0;
        v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(name);
    } catch (...) {
        throw std::invalid_argument("unknown codebook size name '" + name + "'");
    }
    const double entries_d = v * 1024.0;
    const auto entries = static_cast<std::uint32_t>(std::llround(entries_d));
    if (entries_d != static_cast<double>(entries) || !power_of_two(entries) || entries < 8) {
        throw std::invalid_argument("codebook size name '" + name +
                                    "' does not map to a power-of-two entry count >= 8");
    }
    cfg.entries_s = entries;
    cfg.entries_r = entries;
    cfg.entries_c = std::max<std::uint32_t>(2, entries / 4);
    cfg.entries_sh = std::max<std::uint32_t>(2, entries / 4);
}

const std::vector<std::uint32_t>& QuantizedCloud::indices(AttrGroup g) const {
    switch (g) {
        case AttrGroup::Scale: return idx_s;
        case AttrGroup::Rotation: return idx_r;
        case AttrGroup::Color: return idx_c;
        default: return idx_sh;
    }
}

std::vector<std::uint32_t>& QuantizedCloud::indices(AttrGroup g) {
    return const_cast<std::vector<std::uint32_t>&>(
        static_cast<const QuantizedCloud*>(this)->indices(g));
}

const Codebook& QuantizedCloud::codebook(AttrGroup g) const {
    switch (g) {
        case AttrGroup::Scale: return cb_s;
        case AttrGroup::Rotation: return cb_r;
        case AttrGroup::Color: return cb_c;
        default: return cb_sh;
    }
}

Codebook& QuantizedCloud::codebook(AttrGroup g) {
    return const_cast<Codebook&>(static_cast<const QuantizedCloud*>(this)->codebook(g));
}

std::vector<float> extract_group(const SplatCloud& cloud, AttrGroup g) {
    const std::uint32_t dim = kGroupDims[static_cast<int>(g)];
    std::vector<float> out(cloud.size() * dim);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        const GaussianSplat& s = cloud.splats[i];
        float* dst = out.data() + i * dim;
        switch (g) {
            case AttrGroup::Scale:
                std::memcpy(dst, s.scale_raw.data(), 3 * sizeof(float));
                break;
            case AttrGroup::Rotation:
                std::memcpy(dst, s.rotation.data(), 4 * sizeof(float));
                break;
            case AttrGroup::Color:
                std::memcpy(dst, s.color_dc.data(), 3 * sizeof(float));
                break;
            case AttrGroup::Sh:
                std::memcpy(dst, s.sh_rest.data(), 45 * sizeof(float));
                break;
        }
    }
    return out;
}

SplatCloud prune(const SplatCloud& cloud, const CompressionConfig& cfg, int steps,
                 std::size_t* removed) {
    SplatCloud out = cloud;
    if (cfg.prune_lambda > 0.0 && steps > 0) {
        parallel_for_chunks(out.size(), kChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
            for (std::size_t i = begin; i < end; ++i) {
                double o = out.splats[i].opacity_raw;
                for (int s = 0; s < steps; ++s) {
                    const double sig = sigmoid_d(o);
                    o -= cfg.lr_attr * cfg.prune_lambda * sig * (1.0 - sig);
                }
                out.splats[i].opacity_raw = static_cast<float>(o);
            }
        });
    }

    const std::size_t before = out.size();
    std::erase_if(out.splats, [&](const GaussianSplat& s) {
        return static_cast<double>(sigmoid(s.opacity_raw)) < cfg.prune_threshold;
    });
    const std::size_t n_removed = before - out.size();
    if (removed) *removed = n_removed;
    if (n_removed > 0) {
        std::cerr << "[gsvq] prune: removed " << n_removed << " of " << before << " splats\n";
    }
    if (out.empty() && before > 0) {
        std::cerr << "[gsvq] warning: pruning removed every splat\n";
    }
    return out;
}

namespace {

// Render-loss step state shared across iterations.
struct RenderLossContext {
    const SplatCloud* cloud = nullptr;
    const std::vector<Camera>* cams = nullptr;
    std::vector<Image> targets;
    std::vector<Vec3> positions; // world positions, cached
};

// One render-space step for the colour/SH codebooks: geometry enters hard
// quantized under the current assignments (frozen), colour/SH enter as NSVQ
// surrogates, and the image loss gradient is chained through the SH basis and
// nsvq_backward into the two codebooks.
double render_step(int step, RenderLossContext& ctx, Codebook& cb_c, Codebook& cb_sh,
                   const Codebook& cb_s, const Codebook& cb_r, const GroupView views[4],
                   Rng& noise_c, Rng& noise_sh, double lr, EntryGradients& grads_c,
                   EntryGradients& grads_sh) {
    const SplatCloud& cloud = *ctx.cloud;
    const std::size_t n = cloud.size();
    const Camera& cam = (*ctx.cams)[static_cast<std::size_t>(step) % ctx.cams->size()];
    const Image& target = ctx.targets[static_cast<std::size_t>(step) % ctx.cams->size()];

    const auto idx_s = assign_all(cb_s, views[0]);
    const auto idx_r = assign_all(cb_r, views[1]);

    std::vector<NearestHit> hit_c(n), hit_sh(n);
    parallel_for_chunks(n, kChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            hit_c[i] = nearest_entry(cb_c, std::span<const float>(views[2].row(i), 3));
            hit_sh[i] = nearest_entry(cb_sh, std::span<const float>(views[3].row(i), 45));
        }
    });

    // Sequential noise draws keep the streams reproducible.
    std::vector<double> noise_dc(n * 3), noise_rest(n * 45);
    for (std::size_t i = 0; i < n; ++i) {
        ++cb_c.usage[hit_c[i].index];
        ++cb_sh.usage[hit_sh[i].index];
        draw_unit_noise(noise_c, std::span<double>(noise_dc.data() + i * 3, 3));
        draw_unit_noise(noise_sh, std::span<double>(noise_rest.data() + i * 45, 45));
    }

    // Activated splats with surrogate colour attributes.
    std::vector<ActivatedSplat> acts(n);
    parallel_for_chunks(n, kChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            ActivatedSplat a;
            a.position = cloud.splats[i].position;
            a.opacity = sigmoid(cloud.splats[i].opacity_raw);
            const float* zs = cb_s.row(idx_s[i]);
            for (int j = 0; j < 3; ++j) a.scale[j] = std::exp(zs[j]);
            const float* zr = cb_r.row(idx_r[i]);
            double qn = 0.0;
            for (int j = 0; j < 4; ++j) qn += static_cast<double>(zr[j]) * zr[j];
            qn = std::sqrt(qn);
            if (qn < 1e-12) {
                a.rotation = {1.0f, 0.0f, 0.0f, 0.0f};
            } else {
                for (int j = 0; j < 4; ++j) a.rotation[j] = static_cast<float>(zr[j] / qn);
            }
            const float* tc = views[2].row(i);
            for (int j = 0; j < 3; ++j) {
                a.color_dc[j] =
                    static_cast<float>(tc[j] + hit_c[i].distance * noise_dc[i * 3 + j]);
            }
            const float* tsh = views[3].row(i);
            for (int j = 0; j < 45; ++j) {
                a.sh_rest[j] =
                    static_cast<float>(tsh[j] + hit_sh[i].distance * noise_rest[i * 45 + j]);
            }
            acts[i] = a;
        }
    });

    std::vector<std::optional<ProjectedSplat>> slots(n);
    parallel_for_chunks(n, kChunk, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto p = project(acts[i], cam, cloud.sh_degree);
            if (p) p->splat_index = static_cast<std::uint32_t>(i);
            slots[i] = p;
        }
    });
    std::vector<ProjectedSplat> projected;
    projected.reserve(n);
    for (auto& s : slots)
        if (s) projected.push_back(*s);
    const PreparedScene scene = prepare_scene(projected, cam.width, cam.height, n);

    const Image img = render_prepared(scene);
    const double inv_count = 1.0 / static_cast<double>(img.data.size());
    Image upstream(img.width, img.height);
    double loss = 0.0;
    for (std::size_t i = 0; i < img.data.size(); ++i) {
        const double diff = img.data[i] - target.data[i];
        loss += diff * diff;
        upstream.data[i] = 2.0 * diff * inv_count;
    }
    loss *= inv_count;
    if (!std::isfinite(loss)) throw NumericError("non-finite render loss during VQ training");

    const auto grad_color = backward_prepared(scene, upstream);

    const Vec3 center = camera_center(cam);
    const int n_rest = (cloud.sh_degree + 1) * (cloud.sh_degree + 1) - 1;
    std::vector<double> t_d(45), z_d(45), up(45), gt(45), gz(45);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& g = grad_color[i];
        if (g[0] == 0.0 && g[1] == 0.0 && g[2] == 0.0) continue;
        Vec3 dir{ctx.positions[i][0] - center[0], ctx.positions[i][1] - center[1],
                 ctx.positions[i][2] - center[2]};
        const double dn = norm(dir);
        dir = dn > 0.0 ? Vec3{dir[0] / dn, dir[1] / dn, dir[2] / dn} : Vec3{0.0, 0.0, 1.0};
        const auto basis = eval_sh_basis(dir);

        const float* tc = views[2].row(i);
        const float* zc = cb_c.row(hit_c[i].index);
        for (int j = 0; j < 3; ++j) {
            t_d[j] = tc[j];
            z_d[j] = zc[j];
            up[j] = basis[0] * g[j];
        }
        nsvq_backward(std::span<const double>(t_d.data(), 3), std::span<const double>(z_d.data(), 3),
                      std::span<const double>(noise_dc.data() + i * 3, 3),
                      std::span<const double>(up.data(), 3), std::span<double>(gt.data(), 3),
                      std::span<double>(gz.data(), 3));
        grads_c.add(hit_c[i].index, std::span<const double>(gz.data(), 3));

        const float* tsh = views[3].row(i);
        const float* zsh = cb_sh.row(hit_sh[i].index);
        for (int j = 0; j < 45; ++j) {
            t_d[j] = tsh[j];
            z_d[j] = zsh[j];
            const int ch = j / 15, m = j % 15;
            up[j] = m < n_rest ? basis[m + 1] * g[ch] : 0.0;
        }
        nsvq_backward(std::span<const double>(t_d.data(), 45),
                      std::span<const double>(z_d.data(), 45),
                      std::span<const double>(noise_rest.data() + i * 45, 45),
                      std::span<const double>(up.data(), 45), std::span<double>(gt.data(), 45),
                      std::span<double>(gz.data(), 45));
        grads_sh.add(hit_sh[i].index, std::span<const double>(gz.data(), 45));
    }
    grads_c.apply(cb_c, lr);
    grads_sh.apply(cb_sh, lr);
    return loss;
}

} // namespace

QuantizedCloud train_codebooks(const SplatCloud& cloud, const CompressionConfig& cfg,
                               const std::vector<Camera>* cams, CompressionReport* report) {
    cfg.validate();
    if (cloud.empty()) throw std::invalid_argument("train_codebooks: empty cloud");
    if (cfg.render_loss && (cams == nullptr || cams->empty())) {
        throw std::invalid_argument("render_loss training requires scene cameras");
    }

    const std::size_t n = cloud.size();
    std::vector<float> data[4];
    GroupView views[4];
    for (int g = 0; g < 4; ++g) {
        data[g] = extract_group(cloud, static_cast<AttrGroup>(g));
        views[g] = GroupView{data[g].data(), n, kGroupDims[g]};
    }

    QuantizedCloud qc;
    qc.positions.resize(n);
    qc.opacity_raw.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        qc.positions[i] = cloud.splats[i].position;
        qc.opacity_raw[i] = cloud.splats[i].opacity_raw;
    }

    Codebook* books[4] = {&qc.cb_s, &qc.cb_r, &qc.cb_c, &qc.cb_sh};
    for (int g = 0; g < 4; ++g) {
        Rng rng = Rng::fork(cfg.seed, kStreamKmeans + static_cast<std::uint64_t>(g));
        *books[g] = kmeans_init(data[g], n, kGroupDims[g], cfg.entries(static_cast<AttrGroup>(g)),
                                rng, cfg.kmeans_iters, cfg.kmeans_tol);
    }

    if (report) {
        for (int g = 0; g < 4; ++g) {
            const auto idx = assign_all(*books[g], views[g]);
            report->mse_init[g] = group_mse(views[g], *books[g], idx);
        }
        report->replaced_entries = {0, 0, 0, 0};
        report->render_loss_trace.clear();
    }

    Rng noise[4] = {Rng::fork(cfg.seed, kStreamNoise + 0), Rng::fork(cfg.seed, kStreamNoise + 1),
                    Rng::fork(cfg.seed, kStreamNoise + 2), Rng::fork(cfg.seed, kStreamNoise + 3)};
    Rng replace_rng[4] = {
        Rng::fork(cfg.seed, kStreamReplace + 0), Rng::fork(cfg.seed, kStreamReplace + 1),
        Rng::fork(cfg.seed, kStreamReplace + 2), Rng::fork(cfg.seed, kStreamReplace + 3)};
    BatchSampler sampler(n, cfg.batch_size, Rng::fork(cfg.seed, kStreamShuffle));

    EntryGradients grads[4];
    for (int g = 0; g < 4; ++g) {
        grads[g].reset(books[g]->entries, books[g]->dim);
    }

    RenderLossContext rctx;
    if (cfg.render_loss) {
        rctx.cloud = &cloud;
        rctx.cams = cams;
        rctx.positions.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            rctx.positions[i] = Vec3{cloud.splats[i].position[0], cloud.splats[i].position[1],
                                     cloud.splats[i].position[2]};
        }
        rctx.targets.reserve(cams->size());
        for (const Camera& cam : *cams) rctx.targets.push_back(render(cloud, cam));
    }

    for (int step = 0; step < cfg.vq_steps; ++step) {
        const auto batch = sampler.next();
        attr_step(*books[0], views[0], batch, noise[0], cfg.lr_codebook, grads[0]);
        attr_step(*books[1], views[1], batch, noise[1], cfg.lr_codebook, grads[1]);
        if (cfg.render_loss) {
            const double rl = render_step(step, rctx, qc.cb_c, qc.cb_sh, qc.cb_s, qc.cb_r, views,
                                          noise[2], noise[3], cfg.lr_render, grads[2], grads[3]);
            if (report) report->render_loss_trace.push_back(rl);
        } else {
            attr_step(*books[2], views[2], batch, noise[2], cfg.lr_codebook, grads[2]);
            attr_step(*books[3], views[3], batch, noise[3], cfg.lr_codebook, grads[3]);
        }
        if (cfg.replace_period > 0 && (step + 1) % cfg.replace_period == 0) {
            for (int g = 0; g < 4; ++g) {
                const std::uint32_t replaced = replace_inactive(
                    *books[g], cfg.replace_threshold, replace_rng[g], cfg.replace_jitter);
                if (report) report->replaced_entries[g] += replaced;
            }
        }
    }

    for (int g = 0; g < 4; ++g) {
        qc.indices(static_cast<AttrGroup>(g)) = assign_all(*books[g], views[g]);
    }

    if (report) {
        for (int g = 0; g < 4; ++g) {
            const auto& idx = qc.indices(static_cast<AttrGroup>(g));
            report->mse_trained[g] = group_mse(views[g], *books[g], idx);
            report->active_fraction[g] = active_fraction(*books[g], idx);
        }
    }
    return qc;
}

QuantizedCloud finetune_frozen(QuantizedCloud qcloud, const SplatCloud& source,
                               const CompressionConfig& cfg) {
    cfg.validate();
    const std::size_t n = qcloud.size();
    if (source.size() != n) {
        throw std::invalid_argument("finetune_frozen: source cloud size does not match");
    }
    if (n == 0) return qcloud;

    std::vector<float> data[4];
    GroupView views[4];
    for (int g = 0; g < 4; ++g) {
        data[g] = extract_group(source, static_cast<AttrGroup>(g));
        views[g] = GroupView{data[g].data(), n, kGroupDims[g]};
    }

    // Closed-form Lloyd step: each entry moves to the mean of its assignment.
    for (int g = 0; g < 4; ++g) {
        Codebook& cb = qcloud.codebook(static_cast<AttrGroup>(g));
        const auto& idx = qcloud.indices(static_cast<AttrGroup>(g));
        const std::uint32_t dim = cb.dim;
        std::vector<double> sums(std::size_t(cb.entries) * dim, 0.0);
        std::vector<std::size_t> counts(cb.entries, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const float* t = views[g].row(i);
            double* s = sums.data() + std::size_t(idx[i]) * dim;
            for (std::uint32_t j = 0; j < dim; ++j) s[j] += t[j];
            ++counts[idx[i]];
        }
        for (std::uint32_t k = 0; k < cb.entries; ++k) {
            if (counts[k] == 0) continue;
            float* row = cb.row(k);
            const double* s = sums.data() + std::size_t(k) * dim;
            for (std::uint32_t j = 0; j < dim; ++j) {
                row[j] = static_cast<float>(s[j] / static_cast<double>(counts[k]));
            }
        }
    }

    // SGD polish on the hard-quantized loss, indices frozen.
    BatchSampler sampler(n, cfg.batch_size, Rng::fork(cfg.seed, kStreamFinetune));
    EntryGradients grads;
    std::vector<double> gz;
    for (int step = 0; step < cfg.finetune_steps; ++step) {
        const auto batch = sampler.next();
        const double batch_n = static_cast<double>(batch.size());
        for (int g = 0; g < 4; ++g) {
            Codebook& cb = qcloud.codebook(static_cast<AttrGroup>(g));
            const auto& idx = qcloud.indices(static_cast<AttrGroup>(g));
            const std::uint32_t dim = cb.dim;
            grads.reset(cb.entries, dim);
            gz.resize(dim);
            for (const std::uint32_t i : batch) {
                const float* t = views[g].row(i);
                const float* z = cb.row(idx[i]);
                for (std::uint32_t j = 0; j < dim; ++j) {
                    gz[j] = 2.0 * (static_cast<double>(z[j]) - t[j]) / batch_n;
                }
                grads.add(idx[i], gz);
            }
            grads.apply(cb, cfg.lr_codebook);
        }
    }
    return qcloud;
}

QuantizedCloud compress(const SplatCloud& cloud, const CompressionConfig& cfg,
                        const std::vector<Camera>* cams, CompressionReport* report) {
    cfg.validate();
    if (cloud.empty()) throw std::invalid_argument("compress: empty input cloud");

    std::size_t removed = 0;
    SplatCloud pruned = prune(cloud, cfg, cfg.prune_steps, &removed);
    if (report) {
        report->input_splats = cloud.size();
        report->pruned_splats = pruned.size();
        report->removed_splats = removed;
    }
    if (pruned.empty()) {
        throw std::invalid_argument("compress: pruning removed every splat; lower prune_threshold");
    }

    QuantizedCloud qc = train_codebooks(pruned, cfg, cams, report);
    qc = finetune_frozen(std::move(qc), pruned, cfg);

    if (report) {
        report->mse_final = quantization_mse(pruned, qc);
        for (int g = 0; g < 4; ++g) {
            report->active_fraction[g] = active_fraction(qc.codebook(static_cast<AttrGroup>(g)),
                                                         qc.indices(static_cast<AttrGroup>(g)));
        }
    }
    return qc;
}

SplatCloud dequantize(const QuantizedCloud& qcloud) {
    const std::size_t n = qcloud.size();
    for (int g = 0; g < 4; ++g) {
        const auto& idx = qcloud.indices(static_cast<AttrGroup>(g));
        const Codebook& cb = qcloud.codebook(static_cast<AttrGroup>(g));
        if (idx.size() != n) {
            throw FormatError(FormatError::Kind::BadValue, 0,
                              std::string("index stream for ") + kGroupNames[g] +
                                  " has wrong length");
        }
        for (std::size_t i = 0; i < n; ++i) {
            if (idx[i] >= cb.entries) {
                throw FormatError(FormatError::Kind::IndexRange, 0,
                                  std::string("corrupt ") + kGroupNames[g] + " index " +
                                      std::to_string(idx[i]) + " at splat " + std::to_string(i) +
                                      " (codebook has " + std::to_string(cb.entries) +
                                      " entries)");
            }
        }
    }

    SplatCloud cloud;
    cloud.sh_degree = 3;
    cloud.splats.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        GaussianSplat& s = cloud.splats[i];
        s.position = qcloud.positions[i];
        s.opacity_raw = qcloud.opacity_raw[i];
        std::memcpy(s.scale_raw.data(), qcloud.cb_s.row(qcloud.idx_s[i]), 3 * sizeof(float));
        std::memcpy(s.rotation.data(), qcloud.cb_r.row(qcloud.idx_r[i]), 4 * sizeof(float));
        std::memcpy(s.color_dc.data(), qcloud.cb_c.row(qcloud.idx_c[i]), 3 * sizeof(float));
        std::memcpy(s.sh_rest.data(), qcloud.cb_sh.row(qcloud.idx_sh[i]), 45 * sizeof(float));
    }
    return cloud;
}

std::array<double, 4> quantization_mse(const SplatCloud& cloud, const QuantizedCloud& qcloud) {
    if (cloud.size() != qcloud.size()) {
        throw std::invalid_argument("quantization_mse: splat counts differ");
    }
    std::array<double, 4> out{};
    for (int g = 0; g < 4; ++g) {
        const auto data = extract_group(cloud, static_cast<AttrGroup>(g));
        const GroupView view{data.data(), cloud.size(), kGroupDims[g]};
        out[g] = group_mse(view, qcloud.codebook(static_cast<AttrGroup>(g)),
                           qcloud.indices(static_cast<AttrGroup>(g)));
    }
    return out;
}

} // namespace gsvq
