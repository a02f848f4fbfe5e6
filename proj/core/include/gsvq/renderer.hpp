#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gsvq/camera.hpp"
#include "gsvq/image.hpp"
#include "gsvq/splat.hpp"

namespace gsvq {

// A splat after projection into one camera.
struct ProjectedSplat {
    std::array<double, 2> mu{};    // pixel coordinates
    std::array<double, 3> cov{};   // 2x2 symmetric (xx, xy, yy), low-pass dilated
    double depth = 0.0;            // view-space z
    std::array<double, 3> color{}; // SH-evaluated, view-dependent, pre-clamp
    double opacity = 0.0;
    std::uint32_t splat_index = 0;
};

struct RenderStats {
    std::size_t culled = 0;           // behind the near plane
    std::size_t skipped_singular = 0; // |cov2d| below the singularity floor
};

// Real SH basis values for a unit direction, reference 3DGS ordering/signs.
// b[0] is the DC term; degrees 1..3 follow.
std::array<double, 16> eval_sh_basis(const Vec3& unit_dir);

// View-dependent colour: sum of basis-weighted coefficients plus the 0.5
// offset. `rest` is channel-major (15 coefficients per channel). Throws
// std::invalid_argument if unit_dir is not unit norm within 1e-6.
std::array<double, 3> eval_sh(const std::array<float, 3>& dc, const std::array<float, 45>& rest,
                              int degree, const Vec3& unit_dir);

// Projects one activated splat; nullopt when culled by the near plane.
// cov2d = (J W Sigma W^T J^T)_{2x2} + 0.3 I. Colour is evaluated with the
// per-splat view direction (camera center to splat center).
std::optional<ProjectedSplat> project(const ActivatedSplat& splat, const Camera& cam,
                                      int sh_degree = 3);

// Depth-sorted scene prepared for per-pixel blending. Splats whose 2D
// covariance is singular or whose footprint misses the image are dropped
// (counted in stats).
struct PreparedScene {
    struct Draw {
        double mu_x, mu_y;
        double inv_xx, inv_xy, inv_yy;
        double opacity;
        std::array<double, 3> color;     // clamped to [0,1]
        std::array<double, 3> raw_color; // pre-clamp, for the backward mask
        int x0, x1, y0, y1;              // inclusive pixel bounds
        std::uint32_t splat_index;
    };
    int width = 0, height = 0;
    std::size_t source_splats = 0;
    std::vector<Draw> draws; // increasing depth, ties by splat index
    RenderStats stats;
};

PreparedScene prepare_scene(std::span<const ProjectedSplat> projected, int width, int height,
                            std::size_t source_splats, RenderStats stats = {});

Image render_prepared(const PreparedScene& scene,
                      const std::array<double, 3>& background = {0.0, 0.0, 0.0});

// d/d(colour) of render_prepared under the upstream image gradient, with the
// same culling/clamping/early-stop decisions as the forward pass. Indexed by
// original splat index; culled splats get zeros.
std::vector<std::array<double, 3>> backward_prepared(const PreparedScene& scene,
                                                     const Image& upstream);

// cloud -> activated -> projected -> blended.
Image render(const SplatCloud& cloud, const Camera& cam,
             const std::array<double, 3>& background = {0.0, 0.0, 0.0},
             RenderStats* stats = nullptr);

// Per-splat gradients of the blend with respect to the SH-evaluated colour.
std::vector<std::array<double, 3>> render_colour_backward(const SplatCloud& cloud,
                                                          const Camera& cam,
                                                          const Image& upstream);

// Blending constants shared by forward and backward.
inline constexpr double kAlphaClamp = 0.99;
inline constexpr double kAlphaCutoff = 1.0 / 255.0;
inline constexpr double kTransmittanceStop = 1e-4;
inline constexpr double kCovDilation = 0.3;

} // namespace gsvq
