#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "gsvq/mat.hpp"

namespace gsvq {

// One Gaussian primitive as stored on disk (pre-activation parameters).
// 59 floats total: 3 + 1 + 3 + 4 + 3 + 45. The PLY layout additionally
// carries three unused normal fields.
struct GaussianSplat {
    std::array<float, 3> position{};   // world units
    float opacity_raw = 0.0f;          // sigmoid -> opacity in (0,1)
    std::array<float, 3> scale_raw{};  // exp -> scale, world units
    std::array<float, 4> rotation{};   // quaternion (w,x,y,z); normalized on use
    std::array<float, 3> color_dc{};   // SH degree-0 coefficients, one per channel
    std::array<float, 45> sh_rest{};   // SH degrees 1..3, channel-major (15 per channel)

    bool operator==(const GaussianSplat&) const = default;
};

inline constexpr int kSplatParamCount = 59;
inline constexpr int kShRestCount = 45;

struct SplatCloud {
    std::vector<GaussianSplat> splats;
    int sh_degree = 3; // active SH degree in [0,3]; sh_rest beyond it is zero

    std::size_t size() const { return splats.size(); }
    bool empty() const { return splats.empty(); }
    bool operator==(const SplatCloud&) const = default;
};

// Post-activation attribute bundle consumed by the renderer.
struct ActivatedSplat {
    std::array<float, 3> position{};
    float opacity = 0.0f;             // sigmoid(opacity_raw)
    std::array<float, 3> scale{};     // exp(scale_raw)
    std::array<float, 4> rotation{};  // unit quaternion
    std::array<float, 3> color_dc{};
    std::array<float, 45> sh_rest{};
};

// Throws NumericError on a zero quaternion.
ActivatedSplat activate(const GaussianSplat& splat);

// Sigma = R S S^T R^T with S = diag(exp(scale_raw)) and R from the normalized
// quaternion. Symmetric positive semi-definite. Throws NumericError on a zero
// quaternion.
Mat3 covariance3d(const std::array<float, 3>& scale_raw, const std::array<float, 4>& rotation);

// Rotation matrix of a quaternion (w,x,y,z); normalizes internally.
Mat3 quaternion_to_matrix(const std::array<float, 4>& q);

inline float sigmoid(float x) { return 1.0f / (1.0f + std::exp(-x)); }
inline float inverse_sigmoid(float y) { return std::log(y / (1.0f - y)); }

} // namespace gsvq
