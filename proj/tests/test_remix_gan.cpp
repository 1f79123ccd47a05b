// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#include "remix3d/remix_gan.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <fstream>
#include <limits>
#include <nlohmann/json.hpp>

using namespace remix3d;
using nn::Tensor;
namespace fs = std::filesystem;

namespace {

class ConstantCritic : public Critic {
public:
    explicit ConstantCritic(double c) : c_(c) {}
    double score(const Tensor&) override { return c_; }
    double score_with_input_grad(const Tensor& x, Tensor& dx) override {
        dx = Tensor(x.c, x.d, x.h, x.w);
        return c_;
    }

private:
    double c_;
};

// <w, x> with a fixed weight tensor
class LinearCritic : public Critic {
public:
    explicit LinearCritic(Tensor w) : w_(std::move(w)) {}
    double score(const Tensor& x) override {
        double s = 0.0;
        for (size_t n = 0; n < x.v.size(); ++n) s += double(w_.v[n]) * x.v[n];
        return s;
    }
    double score_with_input_grad(const Tensor& x, Tensor& dx) override {
        dx = w_;
        return score(x);
    }

private:
    Tensor w_;
};

Tensor scalar(float v) { return Tensor(1, 1, 1, 1, v); }

GanConfig tiny_config() {
    GanConfig cfg;
    cfg.stages = 2;
    cfg.noise_extent = {2, 2, 2};
    cfg.gen_width = 6;
    cfg.gen_layers = 3;
    cfg.critic_width = 6;
    cfg.critic_layers = 3;
    cfg.patch3d = 4;
    cfg.patch2d = 6;
    cfg.batch2d = 2;
    cfg.batch3d = 2;
    cfg.n_critic = 1;
    cfg.iterations = 3;
    cfg.samples_per_ray = 16;
    cfg.log_every = 1;
    return cfg;
}

PoseModel tiny_pose(int stages) {
    const Camera ex = look_at(Vec3(0, 0, 3), Vec3::Zero(), Vec3::UnitY(), 10, 8, 8);
    return default_pose_model(Vec3::Constant(-1), Vec3::Constant(1), ex, stages);
}

FeatureGrid grid_of(Int3 dims, uint64_t seed) {
    Rng rng(seed);
    return remix3d::testing::random_grid(dims, rng);
}

} // namespace

TEST(Wgan, ConstantCriticGivesUnitPenalty) {
    ConstantCritic critic(0.7);
    Rng rng(1);
    const std::vector<Tensor> real = {scalar(1), scalar(3)}, fake = {scalar(0), scalar(-2)};
    const WganTerms t = critic_loss_wgan(critic, real, fake, 10.0, rng);
    EXPECT_EQ(t.wasserstein, 0.0);
    EXPECT_NEAR(t.penalty, 1.0, 1e-12);
    EXPECT_NEAR(t.total, 10.0, 1e-12);
}

TEST(Wgan, UnitGradientLinearCriticHasNoPenalty) {
    Rng rng(2);
    Tensor w = nn::normal_tensor(3, 2, 4, 4, rng);
    double norm = 0.0;
    for (float v : w.v) norm += double(v) * v;
    for (float& v : w.v) v = float(v / std::sqrt(norm));
    LinearCritic critic(w);
    const std::vector<Tensor> real = {nn::normal_tensor(3, 2, 4, 4, rng), nn::normal_tensor(3, 2, 4, 4, rng)};
    const std::vector<Tensor> fake = {nn::normal_tensor(3, 2, 4, 4, rng), nn::normal_tensor(3, 2, 4, 4, rng)};
    const WganTerms t = critic_loss_wgan(critic, real, fake, 10.0, rng);
    EXPECT_LT(t.penalty, 1e-6);
    const double expected = 0.5 * (critic.score(fake[0]) + critic.score(fake[1]) - critic.score(real[0]) -
                                   critic.score(real[1]));
    EXPECT_NEAR(t.wasserstein, expected, 1e-9);
}

TEST(Wgan, ScalarHandCase) {
    LinearCritic critic(scalar(2));
    Rng rng(3);
    const std::vector<Tensor> real = {scalar(1)}, fake = {scalar(0)};
    const WganTerms t = critic_loss_wgan(critic, real, fake, 10.0, rng);
    EXPECT_NEAR(t.wasserstein, -2.0, 1e-12);
    EXPECT_NEAR(t.penalty, 1.0, 1e-12);
    EXPECT_NEAR(t.total, -2.0 + 10.0, 1e-12);
}

TEST(Wgan, ShapeAndBatchErrors) {
    ConstantCritic critic(0);
    Rng rng(4);
    const std::vector<Tensor> one = {scalar(1)}, none;
    const std::vector<Tensor> other = {Tensor(1, 1, 2, 1)};
    EXPECT_THROW(critic_loss_wgan(critic, one, none, 10.0, rng), PreconditionError);
    EXPECT_THROW(critic_loss_wgan(critic, one, other, 10.0, rng), PreconditionError);
    EXPECT_THROW(generator_adv_loss(critic, none), PreconditionError);
}

TEST(Wgan, GeneratorAdversarialLoss) {
    ConstantCritic c(0.3);
    const std::vector<Tensor> fake = {scalar(5), scalar(-1)};
    EXPECT_NEAR(generator_adv_loss(c, fake), -0.3, 1e-15);
    LinearCritic lin(scalar(2));
    EXPECT_NEAR(generator_adv_loss(lin, fake), -(10.0 - 2.0) / 2.0, 1e-12);
}

TEST(Wgan, ConvCriticParameterGradientMatchesLoss) {
    // leaky slope 1 keeps the critic smooth so a directional difference is exact up to rounding
    GanConfig cfg = tiny_config();
    cfg.leaky_slope = 1.0f;
    for (int dims : {2, 3}) {
        ConvCritic critic(dims, dims == 2 ? 3 : 4, 5, 3, 1.0f, cfg, 7);
        Rng data(5);
        const int d = dims == 2 ? 1 : 4;
        std::vector<Tensor> real, fake;
        for (int b = 0; b < 2; ++b) {
            real.push_back(nn::normal_tensor(dims == 2 ? 3 : 4, d, 5, 5, data));
            fake.push_back(nn::normal_tensor(dims == 2 ? 3 : 4, d, 5, 5, data));
        }
        const Rng start(9);
        Rng rng = start;
        critic.zero_grad();
        critic_loss_wgan(critic, real, fake, 10.0, rng, true);
        const nn::FloatVec grad = critic.grad;

        Rng dir_rng(6);
        std::normal_distribution<float> nd;
        nn::FloatVec dir(grad.size());
        for (float& v : dir) v = nd(dir_rng);
        const nn::FloatVec p0 = critic.net.params();
        auto loss_at = [&](float t) {
            for (size_t n = 0; n < p0.size(); ++n) critic.net.params()[n] = p0[n] + t * dir[n];
            Rng r = start;
            return critic_loss_wgan(critic, real, fake, 10.0, r).total;
        };
        const float eps = 1e-2f;
        const double fd = (loss_at(eps) - loss_at(-eps)) / (2 * eps);
        double analytic = 0.0;
        for (size_t n = 0; n < grad.size(); ++n) analytic += double(grad[n]) * dir[n];
        EXPECT_NEAR(analytic, fd, 2e-2 * (1 + std::abs(fd))) << "dims " << dims;
    }
}

TEST(Generator, ShapesFollowTheStageContract) {
    GanConfig cfg = tiny_config();
    cfg.stages = 3;
    GeneratorStack stack = GeneratorStack::create(cfg, Vec3::Constant(-1), Vec3::Constant(1), 3);
    for (int k = 0; k < 3; ++k) stack.add_stage(3);
    EXPECT_THROW(stack.add_stage(3), PreconditionError);
    for (int k = 0; k < 3; ++k) {
        const FeatureGrid g = generate(stack, stack.z_star, k);
        const int e = 2 * (2 << k);
        EXPECT_EQ(g.dims(), (Int3{e, e, e}));
        EXPECT_EQ(g.dims(), GanConfig::stage_dims(k, cfg.noise_extent));
        for (double v : g.data) {
            ASSERT_GE(v, -1.0);
            ASSERT_LE(v, 1.0);
        }
    }
    EXPECT_THROW(generate(stack, stack.z_star, 3), PreconditionError);
    Rng rng(1);
    for (Int3 extent : {Int3{2, 4, 2}, Int3{3, 2, 5}}) {
        const FeatureGrid g = generate(stack, sample_noise(cfg.n_z, extent, rng), 2);
        EXPECT_EQ(g.dims(), (Int3{extent[0] * 8, extent[1] * 8, extent[2] * 8}));
    }
}

TEST(Generator, DeterministicGivenNoise) {
    GeneratorStack stack = GeneratorStack::create(tiny_config(), Vec3::Constant(-1), Vec3::Constant(1), 4);
    stack.add_stage(4);
    stack.add_stage(4);
    Rng a(5), b(5);
    const NoiseGrid za = sample_noise(4, {2, 2, 2}, a), zb = sample_noise(4, {2, 2, 2}, b);
    EXPECT_EQ(generate(stack, za, 1), generate(stack, zb, 1));
    Rng c(6);
    EXPECT_NE(generate(stack, sample_noise(4, {2, 2, 2}, c), 1), generate(stack, za, 1));
    EXPECT_EQ(stack.z_star.c, 4);
    EXPECT_EQ(GeneratorStack::create(tiny_config(), Vec3::Constant(-1), Vec3::Constant(1), 4).z_star, stack.z_star);
}

TEST(Generator, NoiseIsStandardNormal) {
    Rng rng(7);
    const NoiseGrid z = sample_noise(4, {16, 16, 16}, rng);
    double mean = 0.0, sq = 0.0;
    for (float v : z.v) {
        mean += v;
        sq += double(v) * v;
    }
    mean /= double(z.v.size());
    const double var = sq / double(z.v.size()) - mean * mean;
    // 16384 draws: standard errors 0.008 (mean) and 0.011 (variance)
    EXPECT_LT(std::abs(mean), 0.04);
    EXPECT_LT(std::abs(var - 1.0), 0.06);
}

TEST(Retarget, DoublesAlongTheStretchedAxis) {
    GeneratorStack stack = GeneratorStack::create(tiny_config(), Vec3::Constant(-1), Vec3::Constant(1), 8);
    stack.add_stage(8);
    stack.add_stage(8);
    Rng rng(8);
    const FeatureGrid base = retarget(stack, {2, 2, 2}, rng);
    const FeatureGrid wide = retarget(stack, {4, 2, 2}, rng);
    EXPECT_EQ(base.dims(), (Int3{8, 8, 8}));
    EXPECT_EQ(wide.dims(), (Int3{16, 8, 8}));
    EXPECT_EQ(base.aabb_min, stack.aabb_min);
    EXPECT_EQ(base.aabb_max, stack.aabb_max);
    EXPECT_NEAR(wide.aabb_max.x() - wide.aabb_min.x(), 4.0, 1e-12);
    EXPECT_THROW(retarget(stack, {1, 2, 2}, rng), PreconditionError);
    GeneratorStack empty = GeneratorStack::create(tiny_config(), Vec3::Constant(-1), Vec3::Constant(1), 8);
    EXPECT_THROW(retarget(empty, {2, 2, 2}, rng), PreconditionError);
}

TEST(Objective, PerfectReconstructionAndConstantCritics) {
    GeneratorStack stack = GeneratorStack::create(tiny_config(), Vec3::Constant(-1), Vec3::Constant(1), 9);
    stack.add_stage(9);
    const FeatureGrid ref = generate(stack, stack.z_star, 0);
    ConstantCritic c2(0.25), c3(-0.75);
    LossWeights w;
    w.gamma2d = 1.5;
    w.gamma3d = 0.5;
    const GeneratorLossTerms t = generator_objective(stack, 0, ref, c2, c3, w, tiny_pose(2), 1);
    EXPECT_EQ(t.rec2d, 0.0);
    EXPECT_EQ(t.rec3d, 0.0);
    EXPECT_NEAR(t.total, -(1.5 * 0.25 + 0.5 * -0.75), 1e-12);
}

TEST(Objective, ZeroWeightsGiveZero) {
    GeneratorStack stack = GeneratorStack::create(tiny_config(), Vec3::Constant(-1), Vec3::Constant(1), 10);
    stack.add_stage(10);
    ConstantCritic c(3.0);
    LossWeights w{0, 0, 0, 0, 10};
    EXPECT_EQ(total_generator_loss(stack, 0, grid_of({4, 4, 4}, 1), c, c, w, tiny_pose(2), 2), 0.0);
    LossWeights neg;
    neg.rho2d = -1;
    EXPECT_THROW(total_generator_loss(stack, 0, grid_of({4, 4, 4}, 1), c, c, neg, tiny_pose(2), 2), PreconditionError);
}

TEST(Objective, MeanSquaredGridTerm) {
    GeneratorStack stack = GeneratorStack::create(tiny_config(), Vec3::Constant(-1), Vec3::Constant(1), 11);
    stack.add_stage(11);
    FeatureGrid ref = generate(stack, stack.z_star, 0);
    for (double v : ref.data) ASSERT_LT(std::abs(v), 0.9);
    for (double& v : ref.data) v -= 0.1;
    ConstantCritic c(0.0);
    LossWeights w{0, 0, 0, 10, 10};
    EXPECT_NEAR(total_generator_loss(stack, 0, ref, c, c, w, tiny_pose(2), 3), 10 * 0.01, 1e-12);
}

TEST(Objective, EachTermIsLinearInItsWeight) {
    GeneratorStack stack = GeneratorStack::create(tiny_config(), Vec3::Constant(-1), Vec3::Constant(1), 12);
    stack.add_stage(12);
    CriticPair critics = make_critics(tiny_config(), 5);
    const FeatureGrid ref = grid_of({4, 4, 4}, 2);
    const PoseModel pose = tiny_pose(2);
    const GeneratorLossTerms base =
        generator_objective(stack, 0, ref, critics.critic2d, critics.critic3d, LossWeights{}, pose, 4);
    EXPECT_NE(base.adv2d, 0.0);
    EXPECT_NE(base.adv3d, 0.0);
    EXPECT_GT(base.rec2d, 0.0);
    EXPECT_GT(base.rec3d, 0.0);
    const double terms[4] = {base.adv2d, base.adv3d, base.rec2d, base.rec3d};
    for (int which = 0; which < 4; ++which) {
        LossWeights w{0, 0, 0, 0, 10};
        double* slot[4] = {&w.gamma2d, &w.gamma3d, &w.rho2d, &w.rho3d};
        *slot[which] = 2.5;
        const double total = total_generator_loss(stack, 0, ref, critics.critic2d, critics.critic3d, w, pose, 4);
        EXPECT_NEAR(total, 2.5 * terms[which], 1e-9 * (1 + std::abs(total))) << "term " << which;
    }
    EXPECT_THROW(total_generator_loss(stack, 0, grid_of({8, 8, 8}, 2), critics.critic2d, critics.critic3d,
                                      LossWeights{}, pose, 4),
                 PreconditionError);
}

TEST(Objective, GridTermsGradientMatchesDifferences) {
    GanConfig cfg = tiny_config();
    cfg.leaky_slope = 1.0f;
    GeneratorStack stack = GeneratorStack::create(cfg, Vec3::Constant(-1), Vec3::Constant(1), 13);
    stack.add_stage(13);
    stack.freeze(0);
    stack.add_stage(13);
    CriticPair critics = make_critics(cfg, 6);
    const FeatureGrid ref = grid_of({8, 8, 8}, 3);
    const PoseModel pose = tiny_pose(2);
    for (LossWeights w : {LossWeights{0, 0, 0, 0, 10}, LossWeights{0, 0, 0, 10, 10}, LossWeights{0, 1, 0, 0, 10}}) {
        if (w.rho3d == 0 && w.gamma3d == 0) w.rho3d = 10; // ensure something is active
        nn::FloatVec grad(stack.stages[1].params().size(), 0.0f);
        generator_objective(stack, 1, ref, critics.critic2d, critics.critic3d, w, pose, 7, &grad);
        Rng dir_rng(8);
        std::normal_distribution<float> nd;
        nn::FloatVec dir(grad.size());
        for (float& v : dir) v = nd(dir_rng);
        const nn::FloatVec p0 = stack.stages[1].params();
        auto loss_at = [&](float t) {
            for (size_t n = 0; n < p0.size(); ++n) stack.stages[1].params()[n] = p0[n] + t * dir[n];
            return total_generator_loss(stack, 1, ref, critics.critic2d, critics.critic3d, w, pose, 7);
        };
        const float eps = 2e-3f;
        const double fd = (loss_at(eps) - loss_at(-eps)) / (2 * eps);
        loss_at(0.0f);
        double analytic = 0.0;
        for (size_t n = 0; n < grad.size(); ++n) analytic += double(grad[n]) * dir[n];
        EXPECT_NEAR(analytic, fd, 2e-2 * (1 + std::abs(fd))) << "gamma3d " << w.gamma3d << " rho3d " << w.rho3d;
    }
}

TEST(Objective, RenderedTermsGradientMatchesDifferences) {
    GanConfig cfg = tiny_config();
    cfg.leaky_slope = 1.0f;
    GeneratorStack stack = GeneratorStack::create(cfg, Vec3::Constant(-1), Vec3::Constant(1), 14);
    stack.add_stage(14);
    CriticPair critics = make_critics(cfg, 9);
    // a dense reference keeps the density channel away from the clamp kink
    FeatureGrid ref = grid_of({4, 4, 4}, 4);
    const PoseModel pose = tiny_pose(2);
    for (float& b : stack.stages[0].params()) b *= 0.5f;
    for (LossWeights w : {LossWeights{0, 0, 10, 0, 10}, LossWeights{1, 0, 0, 0, 10}}) {
        nn::FloatVec grad(stack.stages[0].params().size(), 0.0f);
        generator_objective(stack, 0, ref, critics.critic2d, critics.critic3d, w, pose, 11, &grad);
        Rng dir_rng(12);
        std::normal_distribution<float> nd;
        nn::FloatVec dir(grad.size());
        for (float& v : dir) v = nd(dir_rng);
        const nn::FloatVec p0 = stack.stages[0].params();
        auto loss_at = [&](float t) {
            for (size_t n = 0; n < p0.size(); ++n) stack.stages[0].params()[n] = p0[n] + t * dir[n];
            return total_generator_loss(stack, 0, ref, critics.critic2d, critics.critic3d, w, pose, 11);
        };
        const float eps = 1e-3f;
        const double fd = (loss_at(eps) - loss_at(-eps)) / (2 * eps);
        loss_at(0.0f);
        double analytic = 0.0;
        for (size_t n = 0; n < grad.size(); ++n) analytic += double(grad[n]) * dir[n];
        EXPECT_NEAR(analytic, fd, 5e-2 * (1 + std::abs(fd))) << "gamma2d " << w.gamma2d << " rho2d " << w.rho2d;
    }
}

TEST(StageReference, RepeatedAveragePooling) {
    const FeatureGrid ref = grid_of({16, 16, 16}, 5);
    EXPECT_EQ(stage_reference(ref, {4, 4, 4}), downsample2x(downsample2x(ref)));
    EXPECT_EQ(stage_reference(ref, {16, 16, 16}), ref);
    EXPECT_THROW(stage_reference(ref, {6, 6, 6}), PreconditionError);
    EXPECT_THROW(stage_reference(ref, {32, 32, 32}), PreconditionError);
    EXPECT_EQ(noise_extent_for({64, 64, 32}, 4), (Int3{4, 4, 2}));
    EXPECT_THROW(noise_extent_for({16, 16, 16}, 4), PreconditionError);
}

TEST(Training, FrozenStagesKeepTheirHash) {
    GanConfig cfg = tiny_config();
    GeneratorStack stack = GeneratorStack::create(cfg, Vec3::Constant(-1), Vec3::Constant(1), 15);
    const FeatureGrid ref = grid_of({8, 8, 8}, 6);
    const PoseModel pose = tiny_pose(2);
    stack.add_stage(15);
    CriticPair c0 = make_critics(cfg, 1);
    const std::string before0 = stage_param_hash(stack, 0);
    train_stage(stack, c0, ref, pose, LossWeights{}, 0, 2);
    EXPECT_NE(stage_param_hash(stack, 0), before0);
    stack.add_stage(15);
    CriticPair c1 = make_critics(cfg, 3);
    EXPECT_THROW(train_stage(stack, c1, ref, pose, LossWeights{}, 1, 4), PreconditionError);
    stack.freeze(0);
    const std::string frozen0 = stage_param_hash(stack, 0);
    const std::string before1 = stage_param_hash(stack, 1);
    int logged = 0;
    const auto log = train_stage(stack, c1, ref, pose, LossWeights{}, 1, 4, [&](const GanLogEntry&) { ++logged; });
    EXPECT_EQ(stage_param_hash(stack, 0), frozen0);
    EXPECT_NE(stage_param_hash(stack, 1), before1);
    EXPECT_EQ(int(log.size()), cfg.iterations);
    EXPECT_EQ(logged, cfg.iterations);
    EXPECT_THROW(train_stage(stack, c1, ref, pose, LossWeights{}, 0, 4), PreconditionError);
}

TEST(Training, DeterministicGivenSeeds) {
    GanConfig cfg = tiny_config();
    const FeatureGrid ref = grid_of({4, 4, 4}, 7);
    auto run = [&] {
        GeneratorStack stack = GeneratorStack::create(cfg, Vec3::Constant(-1), Vec3::Constant(1), 16);
        stack.add_stage(16);
        CriticPair c = make_critics(cfg, 5);
        train_stage(stack, c, ref, tiny_pose(2), LossWeights{}, 0, 6);
        return stage_param_hash(stack, 0);
    };
    EXPECT_EQ(run(), run());
}

TEST(Training, NonFiniteLossAborts) {
    GanConfig cfg = tiny_config();
    GeneratorStack stack = GeneratorStack::create(cfg, Vec3::Constant(-1), Vec3::Constant(1), 17);
    stack.add_stage(17);
    stack.stages[0].params()[0] = std::numeric_limits<float>::quiet_NaN();
    CriticPair c = make_critics(cfg, 5);
    try {
        train_stage(stack, c, grid_of({4, 4, 4}, 8), tiny_pose(2), LossWeights{}, 0, 6);
        FAIL() << "expected NumericalAbort";
    } catch (const NumericalAbort& e) {
        EXPECT_NE(std::string(e.what()).find("stage 0"), std::string::npos) << e.what();
        EXPECT_NE(std::string(e.what()).find("iteration 0"), std::string::npos) << e.what();
    }
}

TEST(Checkpoint, RoundTripRestoresTheGenerator) {
    GanConfig cfg = tiny_config();
    Checkpoint ck;
    ck.stack = GeneratorStack::create(cfg, Vec3(-1, -2, -1), Vec3(1, 2, 1), 18);
    ck.stack.add_stage(18);
    ck.stack.freeze(0);
    ck.stack.add_stage(18);
    ck.weights.rho2d = 3.5;
    ck.training_config_json = R"({"master_seed": 5})";
    const fs::path dir = remix3d::testing::scratch_dir("ckpt");
    save_checkpoint(ck, dir);
    const Checkpoint back = load_checkpoint(dir);
    EXPECT_EQ(back.stack.z_star, ck.stack.z_star);
    EXPECT_EQ(back.stack.frozen, ck.stack.frozen);
    EXPECT_EQ(back.stack.aabb_min, ck.stack.aabb_min);
    EXPECT_EQ(back.stack.aabb_max, ck.stack.aabb_max);
    EXPECT_EQ(back.weights.rho2d, 3.5);
    EXPECT_EQ(back.stack.cfg.gen_width, cfg.gen_width);
    for (int k = 0; k < 2; ++k) {
        EXPECT_EQ(back.stack.stages[k].params(), ck.stack.stages[k].params());
        EXPECT_EQ(stage_param_hash(back.stack, k), stage_param_hash(ck.stack, k));
    }
    EXPECT_EQ(generate(back.stack, back.stack.z_star, 1), generate(ck.stack, ck.stack.z_star, 1));
    EXPECT_EQ(checkpoint_hash(dir), checkpoint_hash(dir));

    std::ifstream in(dir / "checkpoint.json");
    const nlohmann::json j = nlohmann::json::parse(in);
    EXPECT_EQ(j.at("format"), kCheckpointFormat);
    EXPECT_EQ(j.at("training").at("master_seed"), 5);
}

TEST(Checkpoint, CorruptionIsDetected) {
    Checkpoint ck;
    ck.stack = GeneratorStack::create(tiny_config(), Vec3::Constant(-1), Vec3::Constant(1), 19);
    ck.stack.add_stage(19);
    const fs::path dir = remix3d::testing::scratch_dir("ckpt-bad");
    save_checkpoint(ck, dir);
    {
        std::fstream f(dir / "stage_0.bin", std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(8);
        f.put('\x7f');
    }
    EXPECT_THROW(load_checkpoint(dir), SchemaError);
    EXPECT_THROW(load_checkpoint(dir / "missing"), Error);
}
