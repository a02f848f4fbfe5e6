#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gsvq/parallel.hpp"
#include "gsvq/renderer.hpp"
#include "gsvq/synth.hpp"
#include "test_util.hpp"

using namespace gsvq;

namespace {

constexpr double kC0 = 0.28209479177387814;
constexpr double kC1 = 0.4886025119029199;

Camera identity_camera(int size, double focal, double principal) {
    Camera cam;
    cam.view = {1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1};
    cam.fx = cam.fy = focal;
    cam.cx = cam.cy = principal;
    cam.width = cam.height = size;
    cam.near = 0.01;
    return cam;
}

// Splat that evaluates (through the DC term) to colour `target`.
GaussianSplat make_splat(const std::array<float, 3>& pos, double opacity, double target_color,
                         float scale_raw) {
    GaussianSplat s;
    s.position = pos;
    s.opacity_raw = inverse_sigmoid(static_cast<float>(opacity));
    s.scale_raw = {scale_raw, scale_raw, scale_raw};
    s.rotation = {1, 0, 0, 0};
    const auto dc = static_cast<float>((target_color - 0.5) / kC0);
    s.color_dc = {dc, dc, dc};
    return s;
}

} // namespace

TEST(EvalSh, DcOnlyIsDirectionIndependent) {
    const std::array<float, 3> dc{0.25f, -0.5f, 1.0f};
    const std::array<float, 45> rest{};
    const auto a = eval_sh(dc, rest, 3, {0, 0, 1});
    const auto b = eval_sh(dc, rest, 3, {1 / std::sqrt(2.0), 0, -1 / std::sqrt(2.0)});
    for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(a[c], kC0 * dc[c] + 0.5, 1e-12);
        EXPECT_NEAR(b[c], a[c], 1e-12);
    }
}

TEST(EvalSh, ZAlignedDegree1Coefficient) {
    const std::array<float, 3> dc{};
    std::array<float, 45> rest{};
    const float coef = 0.3f;
    rest[1] = coef; // channel 0, z-aligned degree-1 basis slot
    const auto up = eval_sh(dc, rest, 3, {0, 0, 1});
    const auto down = eval_sh(dc, rest, 3, {0, 0, -1});
    EXPECT_NEAR(up[0] - down[0], 2.0 * kC1 * coef, 1e-9);
    EXPECT_NEAR(up[1] - down[1], 0.0, 1e-12);
}

TEST(EvalSh, NonUnitDirectionThrows) {
    const std::array<float, 3> dc{};
    const std::array<float, 45> rest{};
    EXPECT_THROW(eval_sh(dc, rest, 3, {0, 0, 2}), std::invalid_argument);
}

TEST(Project, OpticalAxisClosedForm) {
    const double sigma = 0.05, depth = 2.0, fx = 100.0;
    const Camera cam = identity_camera(64, fx, 32.0);
    const auto splat = make_splat({0, 0, static_cast<float>(depth)}, 0.7, 0.8,
                                  static_cast<float>(std::log(sigma)));
    const auto p = project(activate(splat), cam);
    ASSERT_TRUE(p.has_value());
    EXPECT_NEAR(p->mu[0], 32.0, 1e-9);
    EXPECT_NEAR(p->mu[1], 32.0, 1e-9);
    const double expected = sigma * sigma * fx * fx / (depth * depth) + 0.3;
    EXPECT_NEAR(p->cov[0], expected, 1e-9);
    EXPECT_NEAR(p->cov[2], expected, 1e-9);
    EXPECT_NEAR(p->cov[1], 0.0, 1e-9);
    EXPECT_NEAR(p->depth, depth, 1e-12);
}

TEST(Project, BehindCameraCulled) {
    const Camera cam = identity_camera(64, 100.0, 32.0);
    const auto splat = make_splat({0, 0, -1.0f}, 0.7, 0.8, -3.0f);
    EXPECT_FALSE(project(activate(splat), cam).has_value());
}

TEST(Project, MuScalesWithIntrinsics) {
    Camera cam = identity_camera(64, 120.0, 32.0);
    const auto splat = make_splat({0.3f, -0.2f, 3.0f}, 0.7, 0.8, -3.0f);
    const auto p1 = project(activate(splat), cam);
    cam.fx *= 2;
    cam.fy *= 2;
    cam.cx *= 2;
    cam.cy *= 2;
    cam.width *= 2;
    cam.height *= 2;
    const auto p2 = project(activate(splat), cam);
    ASSERT_TRUE(p1 && p2);
    EXPECT_NEAR(p2->mu[0], 2 * p1->mu[0], 1e-9);
    EXPECT_NEAR(p2->mu[1], 2 * p1->mu[1], 1e-9);
}

TEST(Render, EmptyCloudIsBlack) {
    const Camera cam = identity_camera(16, 20.0, 8.0);
    const Image img = render(SplatCloud{}, cam);
    for (const double v : img.data) EXPECT_EQ(v, 0.0);
}

TEST(Render, BackgroundFillsEmptyScene) {
    const Camera cam = identity_camera(8, 20.0, 4.0);
    const Image img = render(SplatCloud{}, cam, {0.25, 0.5, 0.75});
    EXPECT_EQ(img.at(3, 5, 0), 0.25);
    EXPECT_EQ(img.at(3, 5, 1), 0.5);
    EXPECT_EQ(img.at(3, 5, 2), 0.75);
}

TEST(Render, SingleSplatCenterPixelValue) {
    // Principal point on the center of pixel (16,16).
    const Camera cam = identity_camera(32, 50.0, 16.5);
    const double opacity = 0.8, colour = 0.6;
    SplatCloud cloud;
    cloud.splats.push_back(make_splat({0, 0, 2}, opacity, colour, -1.0f));
    const Image img = render(cloud, cam);
    const double alpha = sigmoid(inverse_sigmoid(static_cast<float>(opacity)));
    const double shade = kC0 * ((colour - 0.5) / kC0) + 0.5;
    for (int c = 0; c < 3; ++c) {
        EXPECT_NEAR(img.at(16, 16, c), shade * std::min(alpha, 0.99), 1e-9);
    }
}

TEST(Render, HighOpacityClampsAt099) {
    const Camera cam = identity_camera(32, 50.0, 16.5);
    SplatCloud cloud;
    cloud.splats.push_back(make_splat({0, 0, 2}, 0.9999, 0.9, -1.0f));
    cloud.splats[0].opacity_raw = 30.0f; // sigmoid ~ 1
    const Image img = render(cloud, cam);
    const double shade = kC0 * ((0.9 - 0.5) / kC0) + 0.5;
    EXPECT_NEAR(img.at(16, 16, 0), shade * 0.99, 1e-9);
}

TEST(Render, TwoSplatHandBlend) {
    const Camera cam = identity_camera(32, 50.0, 16.5);
    const double o1 = 0.6, o2 = 0.45, c1 = 0.7, c2 = 0.3;
    SplatCloud cloud;
    cloud.splats.push_back(make_splat({0, 0, 2}, o1, c1, -1.0f)); // front
    cloud.splats.push_back(make_splat({0, 0, 4}, o2, c2, -0.5f)); // back
    const Image img = render(cloud, cam);
    const double a1 = sigmoid(inverse_sigmoid(static_cast<float>(o1)));
    const double a2 = sigmoid(inverse_sigmoid(static_cast<float>(o2)));
    const double s1 = kC0 * ((c1 - 0.5) / kC0) + 0.5;
    const double s2 = kC0 * ((c2 - 0.5) / kC0) + 0.5;
    const double expected = s1 * a1 + s2 * a2 * (1.0 - a1);
    EXPECT_NEAR(img.at(16, 16, 0), expected, 1e-6);
}

TEST(Render, DepthTiesResolveByIndexOrder) {
    const Camera cam = identity_camera(32, 50.0, 16.5);
    SplatCloud cloud;
    cloud.splats.push_back(make_splat({0, 0, 2}, 0.5, 0.9, -1.0f));
    cloud.splats.push_back(make_splat({0, 0, 2}, 0.5, 0.1, -1.0f)); // same depth
    const Image a = render(cloud, cam);
    // blend order must be index order: splat 0 first
    const double s1 = kC0 * ((0.9 - 0.5) / kC0) + 0.5;
    const double s2 = kC0 * ((0.1 - 0.5) / kC0) + 0.5;
    const double expected = s1 * 0.5 + s2 * 0.5 * 0.5;
    EXPECT_NEAR(a.at(16, 16, 0), expected, 1e-9);
}

TEST(Render, AccumulatedWeightNeverExceedsOne) {
    const SceneSpec spec{.splat_count = 200, .seed = 3};
    SplatCloud cloud = generate_cloud(spec);
    // all-white colours: pixel value equals the accumulated blend weight
    for (auto& s : cloud.splats) {
        const auto dc = static_cast<float>((0.999 - 0.5) / kC0);
        s.color_dc = {dc, dc, dc};
        s.sh_rest = {};
    }
    const auto cams = generate_orbit_cameras(3, 2.5, 48, 48);
    for (const auto& cam : cams) {
        const Image img = render(cloud, cam);
        for (const double v : img.data) {
            EXPECT_GE(v, 0.0);
            EXPECT_LE(v, 0.999 + 1e-9);
        }
    }
}

TEST(Render, ThreadCountDoesNotChangePixels) {
    const SceneSpec spec{.splat_count = 300, .seed = 4};
    const SplatCloud cloud = generate_cloud(spec);
    const auto cams = generate_orbit_cameras(1, 2.5, 64, 64);
    set_max_threads(1);
    const Image a = render(cloud, cams[0]);
    set_max_threads(4);
    const Image b = render(cloud, cams[0]);
    set_max_threads(0);
    EXPECT_EQ(a, b);
}

TEST(PrepareScene, SingularCovarianceSkipped) {
    ProjectedSplat p;
    p.mu = {4, 4};
    p.cov = {1e-7, 0, 1e-7}; // determinant below the floor
    p.depth = 1.0;
    p.color = {0.5, 0.5, 0.5};
    p.opacity = 0.5;
    p.splat_index = 0;
    const PreparedScene scene = prepare_scene({&p, 1}, 8, 8, 1);
    EXPECT_EQ(scene.draws.size(), 0u);
    EXPECT_EQ(scene.stats.skipped_singular, 1u);
}

namespace {

std::vector<ProjectedSplat> random_projected_scene(std::mt19937_64& rng, int size,
                                                   std::size_t count) {
    std::uniform_real_distribution<double> mu(1.0, size - 1.0);
    std::uniform_real_distribution<double> cv(0.2, 3.0);
    std::uniform_real_distribution<double> col(0.05, 0.95);
    std::uniform_real_distribution<double> op(0.2, 0.9);
    std::vector<ProjectedSplat> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        ProjectedSplat& p = out[i];
        p.mu = {mu(rng), mu(rng)};
        const double a = cv(rng), b = cv(rng);
        const double c = 0.3 * std::min(a, b) * (2.0 * col(rng) - 1.0);
        p.cov = {a + 0.3, c, b + 0.3};
        p.depth = 1.0 + col(rng);
        p.color = {col(rng), col(rng), col(rng)};
        p.opacity = op(rng);
        p.splat_index = static_cast<std::uint32_t>(i);
    }
    return out;
}

} // namespace

TEST(RenderBackward, ZeroUpstreamGivesZeroGradients) {
    std::mt19937_64 rng(40);
    const auto projected = random_projected_scene(rng, 8, 4);
    const PreparedScene scene = prepare_scene(projected, 8, 8, 4);
    const Image upstream(8, 8);
    const auto grads = backward_prepared(scene, upstream);
    for (const auto& g : grads)
        for (const double v : g) EXPECT_EQ(v, 0.0);
}

TEST(RenderBackward, SingleSplatGradEqualsAlphaSum) {
    const Camera cam = identity_camera(32, 50.0, 16.5);
    SplatCloud cloud;
    cloud.splats.push_back(make_splat({0, 0, 2}, 0.7, 0.8, -1.0f));
    const Image img = render(cloud, cam);
    Image upstream(32, 32);
    for (auto& v : upstream.data) v = 1.0;
    const auto grads = render_colour_backward(cloud, cam, upstream);
    ASSERT_EQ(grads.size(), 1u);
    const double shade = kC0 * ((0.8 - 0.5) / kC0) + 0.5;
    double alpha_sum = 0.0;
    for (int y = 0; y < 32; ++y)
        for (int x = 0; x < 32; ++x) alpha_sum += img.at(x, y, 0) / shade;
    EXPECT_NEAR(grads[0][0], alpha_sum, 1e-9);
    EXPECT_NEAR(grads[0][1], alpha_sum, 1e-9);
}

TEST(RenderBackward, MatchesFiniteDifferences) {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> up_dist(-1.0, 1.0);
    const int size = 8;
    for (int trial = 0; trial < 8; ++trial) {
        const std::size_t count = 1 + rng() % 5;
        auto projected = random_projected_scene(rng, size, count);
        Image upstream(size, size);
        for (auto& v : upstream.data) v = up_dist(rng);

        const PreparedScene scene = prepare_scene(projected, size, size, count);
        const auto grads = backward_prepared(scene, upstream);

        auto loss = [&](const std::vector<ProjectedSplat>& ps) {
            const Image img = render_prepared(prepare_scene(ps, size, size, count));
            double acc = 0.0;
            for (std::size_t i = 0; i < img.data.size(); ++i) acc += img.data[i] * upstream.data[i];
            return acc;
        };

        const double h = 1e-5;
        for (std::size_t i = 0; i < count; ++i) {
            for (int c = 0; c < 3; ++c) {
                auto plus = projected, minus = projected;
                plus[i].color[c] += h;
                minus[i].color[c] -= h;
                const double fd = (loss(plus) - loss(minus)) / (2 * h);
                EXPECT_NEAR(grads[i][c], fd, 1e-3 * std::max(1.0, std::abs(fd)))
                    << "splat " << i << " channel " << c;
            }
        }
    }
}

TEST(RenderBackward, ClampedColourGetsZeroGradient) {
    std::mt19937_64 rng(42);
    auto projected = random_projected_scene(rng, 8, 1);
    projected[0].color = {1.5, -0.25, 0.5}; // channels 0 and 1 clamp
    const PreparedScene scene = prepare_scene(projected, 8, 8, 1);
    Image upstream(8, 8);
    for (auto& v : upstream.data) v = 1.0;
    const auto grads = backward_prepared(scene, upstream);
    EXPECT_EQ(grads[0][0], 0.0);
    EXPECT_EQ(grads[0][1], 0.0);
    EXPECT_GT(grads[0][2], 0.0);
}

TEST(RenderBackward, ThreadCountDoesNotChangeGradients) {
    std::mt19937_64 rng(43);
    const auto projected = random_projected_scene(rng, 16, 12);
    const PreparedScene scene = prepare_scene(projected, 16, 16, 12);
    Image upstream(16, 16);
    std::uniform_real_distribution<double> d(-1.0, 1.0);
    for (auto& v : upstream.data) v = d(rng);
    set_max_threads(1);
    const auto a = backward_prepared(scene, upstream);
    set_max_threads(4);
    const auto b = backward_prepared(scene, upstream);
    set_max_threads(0);
    EXPECT_EQ(a, b);
}
