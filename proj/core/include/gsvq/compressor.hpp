#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gsvq/camera.hpp"
#include "gsvq/splat.hpp"
#include "gsvq/vq.hpp"

namespace gsvq {

// The four quantized attribute groups, in storage order.
enum class AttrGroup : int { Scale = 0, Rotation = 1, Color = 2, Sh = 3 };

inline constexpr std::array<std::uint32_t, 4> kGroupDims{3, 4, 3, 45};
inline constexpr std::array<const char*, 4> kGroupNames{"scale", "rotation", "color", "sh"};

struct CompressionConfig {
    // Codebook entry counts (powers of two, >= 2).
    std::uint32_t entries_s = 16384;
    std::uint32_t entries_r = 16384;
    std::uint32_t entries_c = 4096;
    std::uint32_t entries_sh = 4096;

    // Pruning phase.
    double prune_lambda = 1e-4;    // weight of the opacity regularizer
    double prune_threshold = 0.005; // activated-opacity removal cutoff
    int prune_steps = 100;

    // VQ / fine-tune phases.
    int vq_steps = 1000;
    int finetune_steps = 100;
    double lr_codebook = 1e-3;
    double lr_attr = 1e-3;   // pruning step size (the only attribute update in scope)
    double lr_render = 1.0;  // render-loss step size for colour/SH codebooks
    std::size_t batch_size = 16384;

    // Codebook replacement policy.
    int replace_period = 500;
    std::uint64_t replace_threshold = 1;
    double replace_jitter = 0.0;

    // K-means initialization.
    int kmeans_iters = 15;
    double kmeans_tol = 1e-7;

    std::uint64_t seed = 0;
    bool render_loss = false;

    std::uint32_t entries(AttrGroup g) const {
        switch (g) {
            case AttrGroup::Scale: return entries_s;
            case AttrGroup::Rotation: return entries_r;
            case AttrGroup::Color: return entries_c;
            default: return entries_sh;
        }
    }

    // Throws std::invalid_argument when a field is out of range.
    void validate() const;
};

// Named codebook sizes: "16k" -> 16384 scaling/rotation entries with
// colour/SH at one quarter; likewise 8k, 4k, 2k, 1k, 0.5k.
// Throws std::invalid_argument on an unknown name.
void apply_size_name(CompressionConfig& cfg, const std::string& name);

// Splats with positions/opacities in full precision and all other attributes
// replaced by codebook indices.
struct QuantizedCloud {
    std::vector<std::array<float, 3>> positions;
    std::vector<float> opacity_raw;
    std::vector<std::uint32_t> idx_s, idx_r, idx_c, idx_sh;
    Codebook cb_s, cb_r, cb_c, cb_sh;

    std::size_t size() const { return positions.size(); }

    const std::vector<std::uint32_t>& indices(AttrGroup g) const;
    std::vector<std::uint32_t>& indices(AttrGroup g);
    const Codebook& codebook(AttrGroup g) const;
    Codebook& codebook(AttrGroup g);

    bool operator==(const QuantizedCloud&) const = default;
};

struct CompressionReport {
    std::size_t input_splats = 0;
    std::size_t pruned_splats = 0;
    std::size_t removed_splats = 0;
    std::array<double, 4> mse_init{};    // after k-means initialization
    std::array<double, 4> mse_trained{}; // after the VQ phase
    std::array<double, 4> mse_final{};   // after fine-tuning
    std::array<double, 4> active_fraction{};
    std::array<std::uint32_t, 4> replaced_entries{};
    std::vector<double> render_loss_trace; // render-loss mode only
};

// Row-major count x dim matrix of one attribute group.
std::vector<float> extract_group(const SplatCloud& cloud, AttrGroup g);

// Gradient steps on the opacity regularizer followed by removal of splats
// whose activated opacity falls below cfg.prune_threshold.
SplatCloud prune(const SplatCloud& cloud, const CompressionConfig& cfg, int steps,
                 std::size_t* removed = nullptr);

// K-means init + NSVQ training with periodic replacement; final assignment is
// the nearest entry per splat. cams are required when cfg.render_loss is set.
QuantizedCloud train_codebooks(const SplatCloud& cloud, const CompressionConfig& cfg,
                               const std::vector<Camera>* cams = nullptr,
                               CompressionReport* report = nullptr);

// Frozen-assignment refinement: one closed-form Lloyd step per codebook entry
// followed by SGD polish on the hard-quantized loss. Indices never change.
// `source` must be the cloud the indices were assigned on.
QuantizedCloud finetune_frozen(QuantizedCloud qcloud, const SplatCloud& source,
                               const CompressionConfig& cfg);

// prune -> train_codebooks -> finetune_frozen.
QuantizedCloud compress(const SplatCloud& cloud, const CompressionConfig& cfg,
                        const std::vector<Camera>* cams = nullptr,
                        CompressionReport* report = nullptr);

// Replaces quantized attributes by their codebook entries. Throws FormatError
// (IndexRange) on a corrupt index.
SplatCloud dequantize(const QuantizedCloud& qcloud);

// Per-group mean squared error between the cloud's raw attributes and the
// quantized values, averaged over all elements.
std::array<double, 4> quantization_mse(const SplatCloud& cloud, const QuantizedCloud& qcloud);

} // namespace gsvq
