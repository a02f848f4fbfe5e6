#pragma once

#include <array>
#include <string>
#include <vector>

#include "gsvq/mat.hpp"

namespace gsvq {

// Pinhole camera. `view` maps world points into camera space (x right,
// y down, z forward); pixel = (fx*x/z + cx, fy*y/z + cy).
struct Camera {
    std::array<double, 16> view{}; // world-to-camera, row-major
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;
    double near = 0.1;

    bool operator==(const Camera&) const = default;
};

// Throws std::invalid_argument if intrinsics/extents are out of range.
void validate_camera(const Camera& cam);

// Rotation block (rows 0..2, cols 0..2) of the view matrix.
Mat3 view_rotation(const Camera& cam);

// Camera center in world coordinates: -R^T t.
Vec3 camera_center(const Camera& cam);

// World point -> camera space.
Vec3 to_camera_space(const Camera& cam, const Vec3& p);

// View matrix looking from `eye` toward `target` with the given world up.
std::array<double, 16> look_at_view(const Vec3& eye, const Vec3& target, const Vec3& up);

// JSON camera file: a single object or an array of objects with fields
//   view (16 numbers, row-major), fx, fy, cx, cy, width, height, near.
std::vector<Camera> load_cameras(const std::string& path);
void save_cameras(const std::vector<Camera>& cams, const std::string& path);

} // namespace gsvq
