#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "gsvq/camera.hpp"
#include "gsvq/compressor.hpp"
#include "gsvq/image.hpp"
#include "gsvq/splat.hpp"

namespace gsvq {

// 10*log10(1 / MSE) for unit-range images; +infinity when identical.
// Throws std::invalid_argument on a dimension mismatch.
double psnr(const Image& a, const Image& b);

// Per-group MSE between the cloud's raw attributes and the dequantized
// attributes, averaged over all elements.
std::array<double, 4> attribute_mse(const SplatCloud& cloud, const QuantizedCloud& qcloud);

struct EvalReport {
    bool has_psnr = false;
    bool psnr_infinite = false;
    double psnr_db = 0.0; // mean of per-image dB values (finite ones)
    std::array<double, 4> attr_mse{};
    std::uint64_t compressed_bytes = 0;
    std::uint64_t uncompressed_bytes = 0;
    double ratio = 0.0;
    std::array<double, 4> codebook_active_fraction{};
};

// Renders original and dequantized clouds per camera and aggregates metrics.
// With no cameras the image metrics are omitted (has_psnr = false).
EvalReport evaluate(const SplatCloud& original, const QuantizedCloud& qcloud,
                    const std::vector<Camera>& cams,
                    const std::array<double, 3>& background = {0.0, 0.0, 0.0});

} // namespace gsvq
