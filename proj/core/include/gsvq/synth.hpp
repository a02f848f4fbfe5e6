#pragma once

#include <cstdint>
#include <vector>

#include "gsvq/camera.hpp"
#include "gsvq/splat.hpp"

namespace gsvq {

// Deterministic synthetic scene generation for desk-scale testing.
struct SceneSpec {
    enum class Preset { Random, Grid };

    std::size_t splat_count = 1000;
    double extent = 1.0;             // box edge length, centered at the origin
    double scale_raw_min = -5.0;     // uniform range for scale_raw
    double scale_raw_max = -3.0;
    double opacity_min = 0.35;       // activated-opacity range
    double opacity_max = 0.95;
    double sh_base = 0.15;           // degree-1 coefficient scale
    double sh_decay = 0.35;          // per-degree energy decay
    std::uint64_t seed = 0;
    Preset preset = Preset::Random;

    // Throws std::invalid_argument when ranges are ill-ordered.
    void validate() const;
};

SplatCloud generate_cloud(const SceneSpec& spec);

// n cameras evenly spaced on a circle of the given radius in the x-z plane,
// all looking at the origin. Camera 0 sits at (radius, 0, 0).
std::vector<Camera> generate_orbit_cameras(int n, double radius, int width, int height);

} // namespace gsvq
