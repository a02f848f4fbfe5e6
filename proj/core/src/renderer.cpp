#include "gsvq/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "gsvq/parallel.hpp"

namespace gsvq {

namespace {

// Reference 3DGS real-SH constants.
constexpr double kSh0 = 0.28209479177387814;
constexpr double kSh1 = 0.4886025119029199;
constexpr double kSh2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                            -1.0925484305920792, 0.5462742152960396};
constexpr double kSh3[7] = {-0.5900435899266435, 2.890611442640554,  -0.4570457994644658,
                            0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                            -0.5900435899266435};

// Mahalanobis level at which alpha falls below 1/255 for any opacity < 1.
const double kQMax = 2.0 * std::log(255.0);

constexpr std::size_t kRowChunk = 8;

int coeffs_for_degree(int degree) { return (degree + 1) * (degree + 1) - 1; }

} // namespace

std::array<double, 16> eval_sh_basis(const Vec3& unit_dir) {
    const double x = unit_dir[0], y = unit_dir[1], z = unit_dir[2];
    const double xx = x * x, yy = y * y, zz = z * z;
    const double xy = x * y, yz = y * z, xz = x * z;

    std::array<double, 16> b{};
    b[0] = kSh0;
    b[1] = -kSh1 * y;
    b[2] = kSh1 * z;
    b[3] = -kSh1 * x;
    b[4] = kSh2[0] * xy;
    b[5] = kSh2[1] * yz;
    b[6] = kSh2[2] * (2.0 * zz - xx - yy);
    b[7] = kSh2[3] * xz;
    b[8] = kSh2[4] * (xx - yy);
    b[9] = kSh3[0] * y * (3.0 * xx - yy);
    b[10] = kSh3[1] * xy * z;
    b[11] = kSh3[2] * y * (4.0 * zz - xx - yy);
    b[12] = kSh3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
    b[13] = kSh3[4] * x * (4.0 * zz - xx - yy);
    b[14] = kSh3[5] * z * (xx - yy);
    b[15] = kSh3[6] * x * (xx - 3.0 * yy);
    return b;
}

std::array<double, 3> eval_sh(const std::array<float, 3>& dc, const std::array<float, 45>& rest,
                              int degree, const Vec3& unit_dir) {
    if (degree < 0 || degree > 3) throw std::invalid_argument("SH degree must be in [0,3]");
    if (std::abs(norm(unit_dir) - 1.0) > 1e-6) {
        throw std::invalid_argument("eval_sh requires a unit view direction");
    }
    const auto b = eval_sh_basis(unit_dir);
    const int n_rest = coeffs_for_degree(degree);
    std::array<double, 3> out{};
    for (int ch = 0; ch < 3; ++ch) {
        double v = b[0] * dc[ch];
        for (int j = 0; j < n_rest; ++j) v += b[j + 1] * rest[ch * 15 + j];
        out[ch] = v + 0.5;
    }
    return out;
}

std::optional<ProjectedSplat> project(const ActivatedSplat& splat, const Camera& cam,
                                      int sh_degree) {
    const Vec3 pos{splat.position[0], splat.position[1], splat.position[2]};
    const Vec3 t = to_camera_space(cam, pos);
    if (t[2] <= cam.near) return std::nullopt;

    // Sigma = R diag(s^2) R^T from activated parameters.
    const Mat3 r = quaternion_to_matrix(splat.rotation);
    Mat3 rs;
    for (int row = 0; row < 3; ++row)
        for (int col = 0; col < 3; ++col) {
            const double s = static_cast<double>(splat.scale[col]);
            rs(row, col) = r(row, col) * s * s;
        }
    const Mat3 sigma = rs * transpose(r);

    // Pinhole Jacobian at the view-space point, rows of the 2x3 map.
    const double z = t[2];
    const double jr0[3] = {cam.fx / z, 0.0, -cam.fx * t[0] / (z * z)};
    const double jr1[3] = {0.0, cam.fy / z, -cam.fy * t[1] / (z * z)};

    const Mat3 w = view_rotation(cam);
    double tw0[3], tw1[3]; // J * W rows
    for (int c = 0; c < 3; ++c) {
        tw0[c] = jr0[0] * w(0, c) + jr0[1] * w(1, c) + jr0[2] * w(2, c);
        tw1[c] = jr1[0] * w(0, c) + jr1[1] * w(1, c) + jr1[2] * w(2, c);
    }
    auto quad = [&sigma](const double* a, const double* b) {
        double acc = 0.0;
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) acc += a[i] * sigma(i, j) * b[j];
        return acc;
    };

    ProjectedSplat out;
    out.cov = {quad(tw0, tw0) + kCovDilation, quad(tw0, tw1), quad(tw1, tw1) + kCovDilation};
    out.mu = {cam.fx * t[0] / z + cam.cx, cam.fy * t[1] / z + cam.cy};
    out.depth = z;
    out.opacity = splat.opacity;

    const Vec3 center = camera_center(cam);
    Vec3 dir{pos[0] - center[0], pos[1] - center[1], pos[2] - center[2]};
    const double n = norm(dir);
    dir = n > 0.0 ? Vec3{dir[0] / n, dir[1] / n, dir[2] / n} : Vec3{0.0, 0.0, 1.0};
    out.color = eval_sh(splat.color_dc, splat.sh_rest, sh_degree, dir);
    return out;
}

PreparedScene prepare_scene(std::span<const ProjectedSplat> projected, int width, int height,
                            std::size_t source_splats, RenderStats stats) {
    PreparedScene scene;
    scene.width = width;
    scene.height = height;
    scene.source_splats = source_splats;
    scene.stats = stats;

    std::vector<const ProjectedSplat*> order;
    order.reserve(projected.size());
    for (const auto& p : projected) order.push_back(&p);
    std::stable_sort(order.begin(), order.end(),
                     [](const ProjectedSplat* a, const ProjectedSplat* b) {
                         return a->depth < b->depth;
                     });

    scene.draws.reserve(order.size());
    for (const ProjectedSplat* p : order) {
        const double det = p->cov[0] * p->cov[2] - p->cov[1] * p->cov[1];
        if (det < 1e-12) {
            ++scene.stats.skipped_singular;
            continue;
        }
        PreparedScene::Draw d;
        d.mu_x = p->mu[0];
        d.mu_y = p->mu[1];
        d.inv_xx = p->cov[2] / det;
        d.inv_xy = -p->cov[1] / det;
        d.inv_yy = p->cov[0] / det;
        d.opacity = p->opacity;
        d.raw_color = p->color;
        for (int c = 0; c < 3; ++c) d.color[c] = std::clamp(p->color[c], 0.0, 1.0);
        d.splat_index = p->splat_index;

        // Conservative pixel bounds: outside them the Mahalanobis form
        // exceeds kQMax, so alpha < 1/255 and the splat is skipped anyway.
        const double rx = std::sqrt(kQMax * p->cov[0]) + 1e-6;
        const double ry = std::sqrt(kQMax * p->cov[2]) + 1e-6;
        d.x0 = std::max(0, static_cast<int>(std::ceil(d.mu_x - rx - 0.5)));
        d.x1 = std::min(width - 1, static_cast<int>(std::floor(d.mu_x + rx - 0.5)));
        d.y0 = std::max(0, static_cast<int>(std::ceil(d.mu_y - ry - 0.5)));
        d.y1 = std::min(height - 1, static_cast<int>(std::floor(d.mu_y + ry - 0.5)));
        if (d.x0 > d.x1 || d.y0 > d.y1) continue;
        scene.draws.push_back(d);
    }
    return scene;
}

namespace {

// One blending kernel for both directions so the traversal decisions are
// identical. kBackward accumulates per-splat colour gradients instead of
// writing pixels.
template <bool kBackward>
void blend_rows(const PreparedScene& scene, std::size_t row_begin, std::size_t row_end,
                const std::array<double, 3>& background, Image* out, const Image* upstream,
                double* grads /* draws x 3 */) {
    const int width = scene.width;

    // Splats whose y-range intersects this row band, in depth order.
    std::vector<const PreparedScene::Draw*> band;
    for (const auto& d : scene.draws) {
        if (d.y1 >= static_cast<int>(row_begin) && d.y0 < static_cast<int>(row_end)) {
            band.push_back(&d);
        }
    }

    for (std::size_t y = row_begin; y < row_end; ++y) {
        const double py = static_cast<double>(y) + 0.5;
        for (int x = 0; x < width; ++x) {
            const double px = static_cast<double>(x) + 0.5;
            double transmittance = 1.0;
            double acc[3] = {0.0, 0.0, 0.0};
            for (const PreparedScene::Draw* d : band) {
                if (x < d->x0 || x > d->x1 || static_cast<int>(y) < d->y0 ||
                    static_cast<int>(y) > d->y1) {
                    continue;
                }
                const double dx = px - d->mu_x;
                const double dy = py - d->mu_y;
                double q = d->inv_xx * dx * dx + 2.0 * d->inv_xy * dx * dy + d->inv_yy * dy * dy;
                if (q < 0.0) q = 0.0;
                double alpha = d->opacity * std::exp(-0.5 * q);
                if (alpha > kAlphaClamp) alpha = kAlphaClamp;
                if (alpha < kAlphaCutoff) continue;
                const double weight = alpha * transmittance;
                if constexpr (kBackward) {
                    const std::size_t di =
                        static_cast<std::size_t>(d - scene.draws.data()) * 3;
                    for (int c = 0; c < 3; ++c) {
                        if (d->raw_color[c] > 0.0 && d->raw_color[c] < 1.0) {
                            grads[di + c] +=
                                upstream->at(x, static_cast<int>(y), c) * weight;
                        }
                    }
                } else {
                    for (int c = 0; c < 3; ++c) acc[c] += d->color[c] * weight;
                }
                transmittance *= 1.0 - alpha;
                if (transmittance < kTransmittanceStop) break;
            }
            if constexpr (!kBackward) {
                for (int c = 0; c < 3; ++c) {
                    out->at(x, static_cast<int>(y), c) = acc[c] + background[c] * transmittance;
                }
            }
        }
    }
}

} // namespace

Image render_prepared(const PreparedScene& scene, const std::array<double, 3>& background) {
    Image img(scene.width, scene.height);
    parallel_for_chunks(static_cast<std::size_t>(scene.height), kRowChunk,
                        [&](std::size_t, std::size_t begin, std::size_t end) {
                            blend_rows<false>(scene, begin, end, background, &img, nullptr,
                                              nullptr);
                        });
    return img;
}

std::vector<std::array<double, 3>> backward_prepared(const PreparedScene& scene,
                                                     const Image& upstream) {
    if (upstream.width != scene.width || upstream.height != scene.height) {
        throw std::invalid_argument("upstream gradient size does not match the scene");
    }
    const std::size_t chunks = num_chunks(static_cast<std::size_t>(scene.height), kRowChunk);
    std::vector<std::vector<double>> partials(chunks);
    parallel_for_chunks(static_cast<std::size_t>(scene.height), kRowChunk,
                        [&](std::size_t chunk, std::size_t begin, std::size_t end) {
                            partials[chunk].assign(scene.draws.size() * 3, 0.0);
                            blend_rows<true>(scene, begin, end, {}, nullptr, &upstream,
                                             partials[chunk].data());
                        });

    std::vector<std::array<double, 3>> grads(scene.source_splats, {0.0, 0.0, 0.0});
    // Merge in chunk order, then scatter by draw order: bit-stable across
    // thread counts.
    std::vector<double> merged(scene.draws.size() * 3, 0.0);
    for (const auto& part : partials) {
        for (std::size_t i = 0; i < merged.size(); ++i) merged[i] += part[i];
    }
    for (std::size_t d = 0; d < scene.draws.size(); ++d) {
        auto& g = grads[scene.draws[d].splat_index];
        for (int c = 0; c < 3; ++c) g[c] += merged[d * 3 + c];
    }
    return grads;
}

namespace {

PreparedScene prepare_cloud(const SplatCloud& cloud, const Camera& cam) {
    validate_camera(cam);
    const std::size_t n = cloud.size();
    std::vector<ProjectedSplat> projected;
    std::vector<std::optional<ProjectedSplat>> slots(n);
    parallel_for_chunks(n, 1024, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            auto p = project(activate(cloud.splats[i]), cam, cloud.sh_degree);
            if (p) p->splat_index = static_cast<std::uint32_t>(i);
            slots[i] = p;
        }
    });
    RenderStats stats;
    projected.reserve(n);
    for (auto& s : slots) {
        if (s) {
            projected.push_back(*s);
        } else {
            ++stats.culled;
        }
    }
    return prepare_scene(projected, cam.width, cam.height, n, stats);
}

} // namespace

Image render(const SplatCloud& cloud, const Camera& cam, const std::array<double, 3>& background,
             RenderStats* stats) {
    const PreparedScene scene = prepare_cloud(cloud, cam);
    if (stats) *stats = scene.stats;
    return render_prepared(scene, background);
}

std::vector<std::array<double, 3>> render_colour_backward(const SplatCloud& cloud,
                                                          const Camera& cam,
                                                          const Image& upstream) {
    const PreparedScene scene = prepare_cloud(cloud, cam);
    return backward_prepared(scene, upstream);
}

} // namespace gsvq
