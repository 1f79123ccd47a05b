// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#include "remix3d/reconstruction.hpp"
#include "remix3d/scene_io.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <limits>

using namespace remix3d;

namespace {

ReconConfig small_config(int final_res, int divisor, int batches) {
    ReconConfig cfg;
    cfg.final_resolution = {final_res, final_res, final_res};
    cfg.start_divisor = divisor;
    cfg.batches_per_level = batches;
    cfg.rays_per_batch = 256;
    cfg.samples_per_ray = 48;
    cfg.log_every = 10;
    return cfg;
}

PosedImageSet black_set() {
    PosedImageSet set;
    set.images.push_back(Image(12, 12, 0.0));
    set.cameras.push_back(look_at(Vec3(2.5, 1.0, 1.5), Vec3::Zero(), Vec3::UnitZ(), 14, 12, 12));
    return set;
}

} // namespace

TEST(Schedule, DivisorSixteenFrom128) {
    ReconConfig cfg;
    cfg.final_resolution = {128, 128, 128};
    cfg.start_divisor = 16;
    const std::vector<Int3> levels = cfg.level_resolutions();
    const std::vector<Int3> expected = {{8, 8, 8}, {16, 16, 16}, {32, 32, 32}, {64, 64, 64}, {128, 128, 128}};
    EXPECT_EQ(levels, expected);
}

TEST(Schedule, RejectsBadDivisors) {
    ReconConfig cfg;
    cfg.final_resolution = {64, 64, 64};
    cfg.start_divisor = 12;
    EXPECT_THROW(cfg.validate(), PreconditionError);
    cfg.start_divisor = 64;
    EXPECT_THROW(cfg.validate(), PreconditionError);
    cfg.start_divisor = 16;
    cfg.rays_per_batch = 0;
    EXPECT_THROW(cfg.validate(), PreconditionError);
    cfg.rays_per_batch = 1;
    EXPECT_NO_THROW(cfg.validate());
    EXPECT_THROW(reconstruct(PosedImageSet{}, cfg, 1), PreconditionError);
}

TEST(Psnr, SentinelFormulaAndShape) {
    const Image a(4, 3, 0.2);
    EXPECT_EQ(psnr(a, a), kPsnrIdentical);
    Image b = a;
    for (double& v : b.rgb) v += 0.1; // mse 0.01
    EXPECT_NEAR(psnr(a, b), 20.0, 1e-9);
    Image c = a;
    c.rgb[0] += 1.0; // mse 1/36
    EXPECT_NEAR(psnr(a, c), 10.0 * std::log10(36.0), 1e-9);
    EXPECT_THROW(psnr(a, Image(3, 4)), PreconditionError);
}

TEST(Reconstruct, AllBlackImageConvergesToBlack) {
    const PosedImageSet set = black_set();
    const FeatureGrid g = reconstruct(set, small_config(8, 2, 150), 3);
    RenderConfig rc;
    rc.samples_per_ray = 48;
    const Image img = render_image(g, set.cameras[0], rc);
    EXPECT_LT(*std::max_element(img.rgb.begin(), img.rgb.end()), 1e-3);
    for (double v : g.data) {
        EXPECT_GE(v, -1.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Reconstruct, DeterministicGivenSeed) {
    const SyntheticScene s = make_synthetic_scene(SceneKind::boxes, 4, 16, 2);
    const PosedImageSet set = render_dataset(s, 3, 12, 5);
    const ReconConfig cfg = small_config(8, 2, 20);
    EXPECT_EQ(reconstruct(set, cfg, 11), reconstruct(set, cfg, 11));
    EXPECT_NE(reconstruct(set, cfg, 11), reconstruct(set, cfg, 12));
}

TEST(Reconstruct, FitsSmallSyntheticScene) {
    const SyntheticScene s = make_synthetic_scene(SceneKind::boxes, 6, 16, 3);
    const PosedImageSet set = render_dataset(s, 8, 24, 6);
    ReconConfig cfg = small_config(16, 4, 250);
    ReconProgress progress;
    const FeatureGrid g = reconstruct(set, cfg, 4, &progress);
    EXPECT_EQ(g.dims(), (Int3{16, 16, 16}));
    ASSERT_EQ(progress.level_losses.size(), 3u);
    EXPECT_LE(progress.level_losses.back(), progress.level_losses.front());
    ASSERT_FALSE(progress.log.empty());
    EXPECT_EQ(progress.log.front().batch, 0);
    double total = 0.0;
    RenderConfig rc;
    rc.samples_per_ray = 128;
    for (size_t n = 0; n < set.size(); ++n) total += psnr(render_image(g, set.cameras[n], rc), set.images[n]);
    EXPECT_GE(total / double(set.size()), 24.0);
}

TEST(Reconstruct, NonFiniteLossAbortsNamingLevelAndBatch) {
    PosedImageSet set = black_set();
    set.images[0].rgb.assign(set.images[0].rgb.size(), std::numeric_limits<double>::quiet_NaN());
    try {
        reconstruct(set, small_config(8, 2, 5), 1);
        FAIL() << "expected NumericalAbort";
    } catch (const NumericalAbort& e) {
        const std::string what = e.what();
        EXPECT_NE(what.find("level 0"), std::string::npos) << what;
        EXPECT_NE(what.find("batch 0"), std::string::npos) << what;
    }
}
