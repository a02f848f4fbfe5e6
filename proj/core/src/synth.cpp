#include "gsvq/synth.hpp"

#include <cmath>
#include <stdexcept>

#include "gsvq/rng.hpp"

namespace gsvq {

namespace {

constexpr double kSh0 = 0.28209479177387814;

int rest_degree(int j) {
    // rest coefficient j in 0..14 -> SH degree 1..3
    if (j < 3) return 1;
    if (j < 8) return 2;
    return 3;
}

} // namespace

void SceneSpec::validate() const {
    if (extent <= 0.0) throw std::invalid_argument("scene extent must be > 0");
    if (scale_raw_min > scale_raw_max) throw std::invalid_argument("scale_raw range ill-ordered");
    if (opacity_min > opacity_max || opacity_min <= 0.0 || opacity_max >= 1.0) {
        throw std::invalid_argument("opacity range must satisfy 0 < min <= max < 1");
    }
    if (sh_base < 0.0 || sh_decay < 0.0) throw std::invalid_argument("SH scales must be >= 0");
}

SplatCloud generate_cloud(const SceneSpec& spec) {
    spec.validate();
    SplatCloud cloud;
    cloud.sh_degree = 3;
    cloud.splats.resize(spec.splat_count);
    Rng rng = Rng::fork(spec.seed, 0x5ce11e);

    if (spec.preset == SceneSpec::Preset::Grid) {
        const auto side = static_cast<std::size_t>(
            std::ceil(std::cbrt(static_cast<double>(std::max<std::size_t>(spec.splat_count, 1)))));
        const double spacing = spec.extent / static_cast<double>(side);
        std::size_t written = 0;
        for (std::size_t ix = 0; ix < side && written < spec.splat_count; ++ix) {
            for (std::size_t iy = 0; iy < side && written < spec.splat_count; ++iy) {
                for (std::size_t iz = 0; iz < side && written < spec.splat_count; ++iz) {
                    GaussianSplat& s = cloud.splats[written++];
                    const double fx = (static_cast<double>(ix) + 0.5) / side;
                    const double fy = (static_cast<double>(iy) + 0.5) / side;
                    const double fz = (static_cast<double>(iz) + 0.5) / side;
                    s.position = {static_cast<float>((fx - 0.5) * spec.extent),
                                  static_cast<float>((fy - 0.5) * spec.extent),
                                  static_cast<float>((fz - 0.5) * spec.extent)};
                    const float sr = static_cast<float>(std::log(spacing * 0.25));
                    s.scale_raw = {sr, sr, sr};
                    s.rotation = {1.0f, 0.0f, 0.0f, 0.0f};
                    s.opacity_raw = inverse_sigmoid(0.9f);
                    for (int c = 0; c < 3; ++c) {
                        const double f = c == 0 ? fx : (c == 1 ? fy : fz);
                        const double target = 0.15 + 0.7 * f;
                        s.color_dc[c] = static_cast<float>((target - 0.5) / kSh0);
                    }
                }
            }
        }
        return cloud;
    }

    for (GaussianSplat& s : cloud.splats) {
        for (int c = 0; c < 3; ++c) {
            s.position[c] = static_cast<float>(rng.uniform(-0.5, 0.5) * spec.extent);
        }
        for (int c = 0; c < 3; ++c) {
            s.scale_raw[c] = static_cast<float>(rng.uniform(spec.scale_raw_min, spec.scale_raw_max));
        }
        double qn = 0.0;
        std::array<double, 4> q{};
        do {
            qn = 0.0;
            for (int c = 0; c < 4; ++c) {
                q[c] = rng.gaussian();
                qn += q[c] * q[c];
            }
            qn = std::sqrt(qn);
        } while (qn == 0.0);
        for (int c = 0; c < 4; ++c) s.rotation[c] = static_cast<float>(q[c] / qn);
        s.opacity_raw =
            inverse_sigmoid(static_cast<float>(rng.uniform(spec.opacity_min, spec.opacity_max)));
        for (int c = 0; c < 3; ++c) {
            const double target = rng.uniform(0.1, 0.9);
            s.color_dc[c] = static_cast<float>((target - 0.5) / kSh0);
        }
        for (int ch = 0; ch < 3; ++ch) {
            for (int j = 0; j < 15; ++j) {
                const double scale =
                    spec.sh_base * std::pow(spec.sh_decay, rest_degree(j) - 1);
                s.sh_rest[ch * 15 + j] = static_cast<float>(scale * rng.gaussian());
            }
        }
    }
    return cloud;
}

std::vector<Camera> generate_orbit_cameras(int n, double radius, int width, int height) {
    if (n < 1) throw std::invalid_argument("orbit camera count must be >= 1");
    if (radius <= 0.0) throw std::invalid_argument("orbit radius must be > 0");

    std::vector<Camera> cams;
    cams.reserve(static_cast<std::size_t>(n));
    const double focal = 0.5 * width / std::tan(0.5235987755982988); // 60 degree fov
    for (int i = 0; i < n; ++i) {
        const double angle = 2.0 * 3.14159265358979323846 * i / n;
        const Vec3 eye{radius * std::cos(angle), 0.0, radius * std::sin(angle)};
        Camera cam;
        cam.view = look_at_view(eye, {0.0, 0.0, 0.0}, {0.0, 1.0, 0.0});
        cam.fx = focal;
        cam.fy = focal;
        cam.cx = width / 2.0;
        cam.cy = height / 2.0;
        cam.width = width;
        cam.height = height;
        cam.near = std::max(1e-3, 0.01 * radius);
        cams.push_back(cam);
    }
    return cams;
}

} // namespace gsvq
