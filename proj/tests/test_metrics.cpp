#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "gsvq/codec.hpp"
#include "gsvq/metrics.hpp"
#include "gsvq/synth.hpp"
#include "test_util.hpp"

using namespace gsvq;
using namespace gsvq::test;

namespace {

Image random_image(std::mt19937_64& rng, int w, int h, double lo = 0.1, double hi = 0.6) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Image img(w, h);
    for (auto& v : img.data) v = dist(rng);
    return img;
}

// Cloud with `prototypes` distinct attribute rows so small codebooks cover it
// exactly.
SplatCloud duplicated_cloud(std::size_t n, std::size_t prototypes, std::uint64_t seed) {
    const SplatCloud protos = random_tame_cloud(prototypes, seed);
    std::mt19937_64 rng(seed + 99);
    std::uniform_real_distribution<float> pos(-0.5f, 0.5f);
    SplatCloud cloud;
    for (std::size_t i = 0; i < n; ++i) {
        GaussianSplat s = protos.splats[rng() % prototypes];
        s.position = {pos(rng), pos(rng), pos(rng)};
        cloud.splats.push_back(s);
    }
    return cloud;
}

} // namespace

TEST(Psnr, IdenticalImagesAreInfinite) {
    std::mt19937_64 rng(70);
    const Image a = random_image(rng, 8, 8);
    EXPECT_TRUE(std::isinf(psnr(a, a)));
}

TEST(Psnr, ConstantOffsetGives20Db) {
    std::mt19937_64 rng(71);
    const Image a = random_image(rng, 16, 16, 0.2, 0.6);
    Image b = a;
    for (auto& v : b.data) v += 0.1;
    EXPECT_NEAR(psnr(a, b), 20.0, 1e-9);
}

TEST(Psnr, Symmetric) {
    std::mt19937_64 rng(72);
    const Image a = random_image(rng, 12, 9);
    const Image b = random_image(rng, 12, 9);
    EXPECT_EQ(psnr(a, b), psnr(b, a));
}

TEST(Psnr, MonotoneInMse) {
    std::mt19937_64 rng(73);
    const Image a = random_image(rng, 8, 8, 0.3, 0.5);
    Image close = a, far = a;
    for (auto& v : close.data) v += 0.01;
    for (auto& v : far.data) v += 0.05;
    EXPECT_GT(psnr(a, close), psnr(a, far));
}

TEST(Psnr, DimensionMismatchThrows) {
    const Image a(4, 4), b(4, 5);
    EXPECT_THROW(psnr(a, b), std::invalid_argument);
}

TEST(AttributeMse, ExactCoverIsZero) {
    const SplatCloud cloud = duplicated_cloud(256, 8, 74);
    CompressionConfig cfg;
    cfg.entries_s = cfg.entries_r = cfg.entries_c = cfg.entries_sh = 8;
    cfg.prune_lambda = 0;
    cfg.prune_steps = 0;
    cfg.prune_threshold = 0;
    cfg.vq_steps = 0;
    cfg.finetune_steps = 0;
    const QuantizedCloud qc = compress(cloud, cfg);
    const auto mse = attribute_mse(cloud, qc);
    for (int g = 0; g < 4; ++g) EXPECT_EQ(mse[g], 0.0);
}

TEST(AttributeMse, SingleEntryMatchesVarianceOracle) {
    const SplatCloud cloud = random_tame_cloud(50, 75);
    QuantizedCloud qc;
    qc.positions.resize(50);
    qc.opacity_raw.resize(50);
    std::mt19937_64 rng(76);
    std::uniform_real_distribution<float> dist(-1.0f, 1.0f);
    qc.cb_s = Codebook::zeros(1, 3);
    qc.cb_r = Codebook::zeros(1, 4);
    qc.cb_c = Codebook::zeros(1, 3);
    qc.cb_sh = Codebook::zeros(1, 45);
    for (auto& v : qc.cb_s.vectors) v = dist(rng);
    for (auto& v : qc.cb_r.vectors) v = dist(rng);
    for (auto& v : qc.cb_c.vectors) v = dist(rng);
    for (auto& v : qc.cb_sh.vectors) v = dist(rng);
    qc.idx_s.assign(50, 0);
    qc.idx_r.assign(50, 0);
    qc.idx_c.assign(50, 0);
    qc.idx_sh.assign(50, 0);

    const auto mse = attribute_mse(cloud, qc);

    // direct oracle for the scale group
    double acc = 0.0;
    for (const auto& s : cloud.splats) {
        for (int j = 0; j < 3; ++j) {
            const double d = double(s.scale_raw[j]) - double(qc.cb_s.vectors[j]);
            acc += d * d;
        }
    }
    EXPECT_NEAR(mse[0], acc / (50.0 * 3.0), 1e-12);
    for (int g = 0; g < 4; ++g) EXPECT_GE(mse[g], 0.0);
}

TEST(AttributeMse, CountMismatchThrows) {
    const SplatCloud cloud = random_tame_cloud(10, 77);
    QuantizedCloud qc;
    qc.positions.resize(9);
    qc.opacity_raw.resize(9);
    EXPECT_THROW(attribute_mse(cloud, qc), std::invalid_argument);
}

TEST(Evaluate, ExactCoverGivesInfinitePsnrAndCompression) {
    const SplatCloud cloud = duplicated_cloud(2048, 16, 78);
    CompressionConfig cfg;
    cfg.entries_s = cfg.entries_r = cfg.entries_c = cfg.entries_sh = 16;
    cfg.prune_lambda = 0;
    cfg.prune_steps = 0;
    cfg.prune_threshold = 0;
    cfg.vq_steps = 0;
    cfg.finetune_steps = 0;
    const QuantizedCloud qc = compress(cloud, cfg);
    const auto cams = generate_orbit_cameras(2, 2.5, 32, 32);
    const EvalReport rep = evaluate(cloud, qc, cams);
    EXPECT_TRUE(rep.has_psnr);
    EXPECT_TRUE(rep.psnr_infinite);
    EXPECT_GT(rep.ratio, 1.0);
    for (int g = 0; g < 4; ++g) {
        EXPECT_EQ(rep.attr_mse[g], 0.0);
        EXPECT_GT(rep.codebook_active_fraction[g], 0.0);
        EXPECT_LE(rep.codebook_active_fraction[g], 1.0);
    }
}

TEST(Evaluate, RatioMatchesSizeReport) {
    const SplatCloud cloud = random_tame_cloud(300, 79);
    CompressionConfig cfg;
    cfg.entries_s = cfg.entries_r = 32;
    cfg.entries_c = cfg.entries_sh = 8;
    cfg.prune_lambda = 0;
    cfg.vq_steps = 10;
    cfg.batch_size = 128;
    cfg.finetune_steps = 5;
    const QuantizedCloud qc = compress(cloud, cfg);
    const EvalReport rep = evaluate(cloud, qc, {});
    EXPECT_FALSE(rep.has_psnr);
    const SizeReport sizes = size_report(qc);
    EXPECT_EQ(rep.ratio, sizes.ratio);
    EXPECT_EQ(rep.compressed_bytes, sizes.total_bytes);
    EXPECT_EQ(rep.uncompressed_bytes, sizes.uncompressed_bytes);
}

TEST(Evaluate, LargerCodebooksDoNotHurtPsnr) {
    // one-seed sanity version of the rate-distortion trend
    const SplatCloud cloud = generate_cloud({.splat_count = 400, .seed = 80});
    const auto cams = generate_orbit_cameras(2, 2.5, 32, 32);
    CompressionConfig cfg;
    cfg.prune_lambda = 0;
    cfg.prune_steps = 0;
    cfg.vq_steps = 30;
    cfg.batch_size = 256;
    cfg.finetune_steps = 10;
    cfg.lr_codebook = 0.1;
    cfg.kmeans_iters = 10;
    cfg.seed = 5;

    cfg.entries_s = cfg.entries_r = 16;
    cfg.entries_c = cfg.entries_sh = 16;
    const EvalReport small = evaluate(cloud, compress(cloud, cfg), cams);
    cfg.entries_s = cfg.entries_r = 128;
    cfg.entries_c = cfg.entries_sh = 128;
    const EvalReport big = evaluate(cloud, compress(cloud, cfg), cams);
    ASSERT_TRUE(small.has_psnr && big.has_psnr);
    EXPECT_GE(big.psnr_db, small.psnr_db - 0.5);
}
