// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#include "remix3d/remix_gan.hpp"

#include "remix3d/config_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace remix3d {

using nlohmann::json;

void GanConfig::validate() const {
    if (n_z < 1) throw PreconditionError("GanConfig: n_z must be >= 1");
    if (stages < 1) throw PreconditionError("GanConfig: stages must be >= 1");
    for (int e : noise_extent)
        if (e < kMinNoiseExtent) throw PreconditionError("GanConfig: noise extent below the generator minimum");
    if (gen_width < 1 || critic_width < 1) throw PreconditionError("GanConfig: widths must be positive");
    if (gen_layers < 2 || critic_layers < 2) throw PreconditionError("GanConfig: networks need at least 2 layers");
    if (patch3d < 1 || patch2d < 1 || batch2d < 1 || batch3d < 1) throw PreconditionError("GanConfig: bad patch setup");
    if (n_critic < 1 || iterations < 0) throw PreconditionError("GanConfig: bad iteration counts");
    if (samples_per_ray < 2) throw PreconditionError("GanConfig: samples_per_ray must be >= 2");
}

Int3 GanConfig::stage_dims(int stage, Int3 extent) {
    const int f = 2 << stage;
    return {extent[0] * f, extent[1] * f, extent[2] * f};
}

Int3 noise_extent_for(Int3 reference_dims, int stages) {
    const int f = 1 << stages;
    Int3 e{};
    for (int a = 0; a < 3; ++a) {
        if (reference_dims[a] % f != 0 || reference_dims[a] / f < kMinNoiseExtent) {
            std::ostringstream os;
            os << "reference grid axis " << a << " (" << reference_dims[a] << " nodes) is not a multiple of " << f
               << " with at least " << kMinNoiseExtent << " noise cells for " << stages << " stages";
            throw PreconditionError(os.str());
        }
        e[a] = reference_dims[a] / f;
    }
    return e;
}

void LossWeights::validate() const {
    if (gamma2d < 0 || gamma3d < 0 || rho2d < 0 || rho3d < 0 || gp_lambda < 0)
        throw PreconditionError("LossWeights: all weights must be non-negative");
}

NoiseGrid sample_noise(int n_z, Int3 extent, Rng& rng) {
    return nn::normal_tensor(n_z, extent[2], extent[1], extent[0], rng);
}

GeneratorStack GeneratorStack::create(const GanConfig& cfg, const Vec3& aabb_min, const Vec3& aabb_max,
                                      uint64_t seed) {
    cfg.validate();
    GeneratorStack s;
    s.cfg = cfg;
    s.aabb_min = aabb_min;
    s.aabb_max = aabb_max;
    Rng rng = make_rng(seed, "z-star");
    s.z_star = sample_noise(cfg.n_z, cfg.noise_extent, rng);
    return s;
}

void GeneratorStack::add_stage(uint64_t seed) {
    const int k = built_stages();
    if (k >= cfg.stages) throw PreconditionError("GeneratorStack::add_stage: all stages are already built");
    Rng rng = make_rng(seed, "stage-init-" + std::to_string(k));
    std::vector<int> widths;
    widths.push_back(k == 0 ? cfg.n_z : FeatureGrid::kChannels + cfg.n_z);
    for (int l = 0; l + 1 < cfg.gen_layers; ++l) widths.push_back(cfg.gen_width);
    widths.push_back(FeatureGrid::kChannels);
    // residual stages start close to the identity refinement
    const float last_gain = k == 0 ? 1.0f : 0.1f;
    stages.push_back(nn::ConvNet::make(widths, 3, 3, k == 0, nn::OutputActivation::tanh, cfg.leaky_slope, rng, last_gain));
    frozen.push_back(false);
}

void GeneratorStack::freeze(int stage) {
    if (stage < 0 || stage >= built_stages()) throw PreconditionError("GeneratorStack::freeze: no such stage");
    frozen[stage] = true;
}

std::pair<Vec3, Vec3> GeneratorStack::aabb_for(Int3 extent) const {
    if (extent == cfg.noise_extent) return {aabb_min, aabb_max};
    const Vec3 center = 0.5 * (aabb_min + aabb_max);
    Vec3 half = 0.5 * (aabb_max - aabb_min);
    for (int a = 0; a < 3; ++a) half[a] *= double(extent[a]) / cfg.noise_extent[a];
    return {center - half, center + half};
}

NoiseGrid stage_noise(const NoiseGrid& z, int stage, Int3 dims) {
    uint64_t h = 0xcbf29ce484222325ULL;
    const auto* bytes = reinterpret_cast<const unsigned char*>(z.v.data());
    for (size_t n = 0; n < z.v.size() * sizeof(float); ++n) {
        h ^= bytes[n];
        h *= 0x100000001b3ULL;
    }
    Rng rng(derive_seed(h, uint64_t(stage)));
    return nn::normal_tensor(z.c, dims[2], dims[1], dims[0], rng);
}

namespace {

FeatureGrid tensor_to_grid(const nn::Tensor& t, const Vec3& lo, const Vec3& hi) {
    FeatureGrid g({t.w, t.h, t.d}, lo, hi);
    std::copy(t.v.begin(), t.v.end(), g.data.begin());
    return g;
}

Int3 extent_of(const NoiseGrid& z) { return {z.w, z.h, z.d}; }

} // namespace

FeatureGrid generate(const GeneratorStack& stack, const NoiseGrid& z, int up_to_stage, GenerateTrace* trace) {
    if (up_to_stage < 0 || up_to_stage >= stack.built_stages())
        throw PreconditionError("generate: stage index " + std::to_string(up_to_stage) + " out of range (built " +
                                std::to_string(stack.built_stages()) + ")");
    if (z.c != stack.cfg.n_z) throw PreconditionError("generate: noise has the wrong channel count");
    const Int3 extent = extent_of(z);
    for (int e : extent)
        if (e < kMinNoiseExtent) throw PreconditionError("generate: noise extent below the generator minimum");
    const auto [lo, hi] = stack.aabb_for(extent);
    if (trace) trace->stage = up_to_stage;

    nn::Tensor out = stack.stages[0].forward(z, (trace && up_to_stage == 0) ? &trace->net : nullptr);
    FeatureGrid grid = tensor_to_grid(out, lo, hi);

    for (int k = 1; k <= up_to_stage; ++k) {
        const FeatureGrid up = upsample2x(grid);
        const Int3 dims = up.dims();
        const nn::Tensor noise = stage_noise(z, k, dims);
        nn::Tensor input(FeatureGrid::kChannels + z.c, dims[2], dims[1], dims[0]);
        std::copy(up.data.begin(), up.data.end(), input.v.begin());
        std::copy(noise.v.begin(), noise.v.end(), input.v.begin() + up.data.size());

        const bool last = k == up_to_stage;
        const nn::Tensor residual = stack.stages[k].forward(input, (trace && last) ? &trace->net : nullptr);
        grid = FeatureGrid(dims, lo, hi);
        if (trace && last) trace->pre_clamp.resize(up.data.size());
        for (size_t n = 0; n < up.data.size(); ++n) {
            const double sum = up.data[n] + residual.v[n];
            if (trace && last) trace->pre_clamp[n] = float(sum);
            grid.data[n] = std::clamp(sum, -1.0, 1.0);
        }
    }
    return grid;
}

void generate_backward(const GeneratorStack& stack, const GenerateTrace& trace, const std::vector<double>& d_grid,
                       nn::FloatVec& grad) {
    const nn::ConvNet& net = stack.stages.at(trace.stage);
    if (grad.size() != net.params().size()) throw PreconditionError("generate_backward: gradient size mismatch");
    const nn::Tensor& out_pre = trace.net.pre.back();
    if (d_grid.size() != out_pre.size()) throw PreconditionError("generate_backward: grid gradient size mismatch");
    nn::Tensor dy(out_pre.c, out_pre.d, out_pre.h, out_pre.w);
    for (size_t n = 0; n < d_grid.size(); ++n) {
        const bool pass = trace.stage == 0 || std::abs(trace.pre_clamp[n]) <= 1.0f;
        dy.v[n] = pass ? float(d_grid[n]) : 0.0f;
    }
    net.backward(trace.net, dy, &grad, nullptr);
}

FeatureGrid retarget(const GeneratorStack& stack, Int3 noise_extent, Rng& rng) {
    if (stack.built_stages() == 0) throw PreconditionError("retarget: the generator has no stages");
    for (int e : noise_extent)
        if (e < kMinNoiseExtent)
            throw PreconditionError("retarget: noise extent " + std::to_string(e) +
                                    " is below the generator minimum of " + std::to_string(kMinNoiseExtent));
    const NoiseGrid z = sample_noise(stack.cfg.n_z, noise_extent, rng);
    return generate(stack, z, stack.built_stages() - 1);
}

ConvCritic::ConvCritic(int dims, int in_channels, int width, int layers, float leaky_slope, const GanConfig& cfg,
                       uint64_t seed) {
    if (dims != 2 && dims != 3) throw PreconditionError("ConvCritic: dims must be 2 or 3");
    Rng rng(seed);
    std::vector<int> widths{in_channels};
    for (int l = 0; l + 1 < layers; ++l) widths.push_back(width);
    widths.push_back(1);
    net = nn::ConvNet::make(widths, dims == 3 ? 3 : 1, 3, false, nn::OutputActivation::none, leaky_slope, rng);
    grad.assign(net.params().size(), 0.0f);
    adam_ = Adam<float>(net.params().size(), cfg.lr_critic, cfg.adam_beta1, cfg.adam_beta2);
}

double ConvCritic::score(const nn::Tensor& x) {
    const nn::Tensor y = net.forward(x);
    double s = 0.0;
    for (float v : y.v) s += v;
    return s / double(y.size());
}

double ConvCritic::score_with_input_grad(const nn::Tensor& x, nn::Tensor& dx) {
    nn::Trace trace;
    const nn::Tensor y = net.forward(x, &trace);
    double s = 0.0;
    for (float v : y.v) s += v;
    const nn::Tensor dy(y.c, y.d, y.h, y.w, float(1.0 / double(y.size())));
    net.backward(trace, dy, nullptr, &dx);
    return s / double(y.size());
}

void ConvCritic::accumulate_score_grad(const nn::Tensor& x, double weight) {
    nn::Trace trace;
    const nn::Tensor y = net.forward(x, &trace);
    const nn::Tensor dy(y.c, y.d, y.h, y.w, float(weight / double(y.size())));
    net.backward(trace, dy, &grad, nullptr);
}

void ConvCritic::accumulate_directional_grad(const nn::Tensor& x, const nn::Tensor& v, double weight) {
    nn::Trace trace, tangent;
    const nn::Tensor y = net.forward(x, &trace);
    net.tangent_forward(trace, v, &tangent);
    const nn::Tensor dy(y.c, y.d, y.h, y.w, float(weight / double(y.size())));
    net.tangent_backward(trace, tangent, dy, grad);
}

void ConvCritic::zero_grad() { std::fill(grad.begin(), grad.end(), 0.0f); }

void ConvCritic::step() { adam_.step(net.params(), grad); }

CriticPair make_critics(const GanConfig& cfg, uint64_t seed) {
    return {ConvCritic(2, 3, cfg.critic_width, cfg.critic_layers, cfg.leaky_slope, cfg, derive_seed(seed, "critic2d")),
            ConvCritic(3, FeatureGrid::kChannels, cfg.critic_width, cfg.critic_layers, cfg.leaky_slope, cfg,
                       derive_seed(seed, "critic3d"))};
}

WganTerms critic_loss_wgan(Critic& critic, std::span<const nn::Tensor> real, std::span<const nn::Tensor> fake,
                           double gp_lambda, Rng& rng, bool accumulate_grads) {
    if (real.empty() || fake.empty()) throw PreconditionError("critic_loss_wgan: empty batch");
    if (real.size() != fake.size()) throw PreconditionError("critic_loss_wgan: real/fake batch sizes differ");
    for (size_t b = 0; b < real.size(); ++b)
        if (!real[b].same_shape(real[0]) || !fake[b].same_shape(real[0]))
            throw PreconditionError("critic_loss_wgan: patch shape mismatch");

    const double inv_b = 1.0 / double(real.size());
    WganTerms t;
    for (size_t b = 0; b < real.size(); ++b) {
        t.wasserstein += inv_b * (critic.score(fake[b]) - critic.score(real[b]));
        if (accumulate_grads) {
            critic.accumulate_score_grad(fake[b], inv_b);
            critic.accumulate_score_grad(real[b], -inv_b);
        }
    }

    std::uniform_real_distribution<float> u01(0.0f, 1.0f);
    for (size_t b = 0; b < real.size(); ++b) {
        const float eps = u01(rng);
        nn::Tensor mix = real[b];
        for (size_t n = 0; n < mix.size(); ++n) mix.v[n] = eps * real[b].v[n] + (1.0f - eps) * fake[b].v[n];
        nn::Tensor g;
        critic.score_with_input_grad(mix, g);
        double sq = 0.0;
        for (float v : g.v) sq += double(v) * v;
        const double norm = std::sqrt(sq);
        t.penalty += inv_b * (norm - 1.0) * (norm - 1.0);
        if (accumulate_grads && gp_lambda != 0.0 && norm > 0.0) {
            // d/dtheta (|g| - 1)^2 = <2 (|g| - 1) g / |g|, dg/dtheta>
            nn::Tensor v = g;
            const float s = float(2.0 * (norm - 1.0) / norm);
            for (float& x : v.v) x *= s;
            critic.accumulate_directional_grad(mix, v, gp_lambda * inv_b);
        }
    }
    t.total = t.wasserstein + gp_lambda * t.penalty;
    return t;
}

double generator_adv_loss(Critic& critic, std::span<const nn::Tensor> fake) {
    if (fake.empty()) throw PreconditionError("generator_adv_loss: empty batch");
    double s = 0.0;
    for (const nn::Tensor& x : fake) s += critic.score(x);
    return -s / double(fake.size());
}

nn::Tensor image_to_tensor(const Image& img) {
    nn::Tensor t(3, 1, img.height, img.width);
    for (int c = 0; c < 3; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x) t.at(c, 0, y, x) = float(img.at(x, y, c));
    return t;
}

nn::Tensor patch_to_tensor(const GridPatch& patch) {
    nn::Tensor t(FeatureGrid::kChannels, patch.size[2], patch.size[1], patch.size[0]);
    std::copy(patch.data.begin(), patch.data.end(), t.v.begin());
    return t;
}

namespace {

RenderConfig gan_render_config(const GanConfig& cfg, uint64_t seed) {
    RenderConfig r;
    r.samples_per_ray = cfg.samples_per_ray;
    r.density_scale = cfg.density_scale;
    r.policy = SamplingPolicy::stratified;
    r.background_rgb = Vec3::Zero();
    r.seed = seed;
    return r;
}

PatchWindow random_window(const PoseModel& pose, int size, Rng& rng) {
    PatchWindow w;
    w.w = std::min(size, pose.width);
    w.h = std::min(size, pose.height);
    w.x = std::uniform_int_distribution<int>(0, pose.width - w.w)(rng);
    w.y = std::uniform_int_distribution<int>(0, pose.height - w.h)(rng);
    return w;
}

Int3 patch3d_size(const GanConfig& cfg, const FeatureGrid& g) {
    return {std::min(cfg.patch3d, g.nx), std::min(cfg.patch3d, g.ny), std::min(cfg.patch3d, g.nz)};
}

// One random rendered patch of `grid`.
nn::Tensor render_random_patch(const FeatureGrid& grid, const GanConfig& cfg, const PoseModel& pose, int stage,
                               Rng& rng) {
    const Camera cam = sample_pose(pose, stage, rng);
    const PatchWindow win = random_window(pose, cfg.patch2d, rng);
    const uint64_t seed = rng();
    return image_to_tensor(render_patch_2d(grid, cam, gan_render_config(cfg, seed), win));
}

void check_finite(double v, const char* what, int stage, int iteration) {
    if (std::isfinite(v)) return;
    std::ostringstream os;
    os << "train_stage: non-finite " << what << " at stage " << stage << ", iteration " << iteration;
    throw NumericalAbort(os.str());
}

} // namespace

GeneratorLossTerms generator_objective(const GeneratorStack& stack, int stage, const FeatureGrid& reference,
                                       Critic& critic2d, Critic& critic3d, const LossWeights& weights,
                                       const PoseModel& pose_model, uint64_t seed, nn::FloatVec* stage_grad) {
    weights.validate();
    const GanConfig& cfg = stack.cfg;
    Rng rng = make_rng(seed, "generator-objective");
    GeneratorLossTerms t;
    const bool want_grad = stage_grad != nullptr;

    // adversarial terms on a fresh sample
    const NoiseGrid z = sample_noise(cfg.n_z, cfg.noise_extent, rng);
    GenerateTrace trace;
    const FeatureGrid fake = generate(stack, z, stage, want_grad ? &trace : nullptr);
    if (fake.dims() != reference.dims())
        throw PreconditionError("generator_objective: generator output and reference resolutions differ");
    std::vector<double> d_fake(want_grad ? fake.data.size() : 0, 0.0);

    const double inv2 = 1.0 / cfg.batch2d;
    for (int b = 0; b < cfg.batch2d; ++b) {
        const Camera cam = sample_pose(pose_model, stage, rng);
        const PatchWindow win = random_window(pose_model, cfg.patch2d, rng);
        const RenderConfig rcfg = gan_render_config(cfg, rng());
        const Image patch = render_patch_2d(fake, cam, rcfg, win);
        nn::Tensor dx;
        t.adv2d -= inv2 * critic2d.score_with_input_grad(image_to_tensor(patch), dx);
        if (want_grad && weights.gamma2d != 0.0) {
            Image d_patch(win.w, win.h);
            for (int c = 0; c < 3; ++c)
                for (int y = 0; y < win.h; ++y)
                    for (int x = 0; x < win.w; ++x) d_patch.at(x, y, c) = -weights.gamma2d * inv2 * dx.at(c, 0, y, x);
            render_patch_vjp(fake, cam, rcfg, win, d_patch, d_fake);
        }
    }

    const double inv3 = 1.0 / cfg.batch3d;
    const Int3 psize = patch3d_size(cfg, fake);
    for (int b = 0; b < cfg.batch3d; ++b) {
        Int3 corner;
        const GridPatch patch = random_patch_3d(fake, psize, rng, &corner);
        nn::Tensor dx;
        t.adv3d -= inv3 * critic3d.score_with_input_grad(patch_to_tensor(patch), dx);
        if (want_grad && weights.gamma3d != 0.0) {
            size_t n = 0;
            for (int c = 0; c < FeatureGrid::kChannels; ++c)
                for (int k = 0; k < psize[2]; ++k)
                    for (int j = 0; j < psize[1]; ++j)
                        for (int i = 0; i < psize[0]; ++i, ++n)
                            d_fake[fake.index(c, corner[0] + i, corner[1] + j, corner[2] + k)] -=
                                weights.gamma3d * inv3 * dx.v[n];
        }
    }

    // reconstruction terms on z*
    GenerateTrace trace_star;
    const FeatureGrid recon = generate(stack, stack.z_star, stage, want_grad ? &trace_star : nullptr);
    std::vector<double> d_recon(want_grad ? recon.data.size() : 0, 0.0);
    const double inv_n = 1.0 / double(recon.data.size());
    for (size_t n = 0; n < recon.data.size(); ++n) {
        const double diff = recon.data[n] - reference.data[n];
        t.rec3d += inv_n * diff * diff;
        if (want_grad) d_recon[n] = 2.0 * weights.rho3d * inv_n * diff;
    }

    {
        const Camera cam = sample_pose(pose_model, stage, rng);
        const PatchWindow win = random_window(pose_model, cfg.patch2d, rng);
        const RenderConfig rcfg = gan_render_config(cfg, rng());
        const Image mine = render_patch_2d(recon, cam, rcfg, win);
        const Image target = render_patch_2d(reference, cam, rcfg, win);
        const double inv_p = 1.0 / double(mine.rgb.size());
        Image d_patch(win.w, win.h);
        for (size_t n = 0; n < mine.rgb.size(); ++n) {
            const double diff = mine.rgb[n] - target.rgb[n];
            t.rec2d += inv_p * diff * diff;
            d_patch.rgb[n] = 2.0 * weights.rho2d * inv_p * diff;
        }
        if (want_grad && weights.rho2d != 0.0) render_patch_vjp(recon, cam, rcfg, win, d_patch, d_recon);
    }

    t.total = weights.gamma2d * t.adv2d + weights.gamma3d * t.adv3d + weights.rho2d * t.rec2d + weights.rho3d * t.rec3d;

    if (want_grad) {
        generate_backward(stack, trace, d_fake, *stage_grad);
        generate_backward(stack, trace_star, d_recon, *stage_grad);
    }
    return t;
}

double total_generator_loss(const GeneratorStack& stack, int stage, const FeatureGrid& reference, Critic& critic2d,
                            Critic& critic3d, const LossWeights& weights, const PoseModel& pose_model, uint64_t seed) {
    return generator_objective(stack, stage, reference, critic2d, critic3d, weights, pose_model, seed).total;
}

FeatureGrid stage_reference(const FeatureGrid& reference, Int3 stage_dims) {
    FeatureGrid g = reference;
    while (g.dims() != stage_dims) {
        for (int a = 0; a < 3; ++a)
            if (g.dims()[a] <= stage_dims[a] || g.dims()[a] % 2)
                throw PreconditionError("stage_reference: reference resolution does not reduce to the stage resolution");
        g = downsample2x(g);
    }
    return g;
}

std::vector<GanLogEntry> train_stage(GeneratorStack& stack, CriticPair& critics, const FeatureGrid& reference,
                                     const PoseModel& pose_model, const LossWeights& weights, int stage, uint64_t seed,
                                     const std::function<void(const GanLogEntry&)>& on_log) {
    const GanConfig& cfg = stack.cfg;
    if (stage != stack.built_stages() - 1) throw PreconditionError("train_stage: stage must be the last built stage");
    if (stack.frozen[stage]) throw PreconditionError("train_stage: stage is frozen");
    for (int k = 0; k < stage; ++k)
        if (!stack.frozen[k]) throw PreconditionError("train_stage: earlier stages must be frozen");
    pose_model.validate();
    weights.validate();
    if (stage >= int(pose_model.focal_schedule.size()))
        throw PreconditionError("train_stage: pose model has no focal length for this stage");

    const FeatureGrid ref = stage_reference(reference, cfg.stage_dims(stage));
    nn::FloatVec& params = stack.stages[stage].params();
    Adam<float> adam(params.size(), cfg.lr_gen, cfg.adam_beta1, cfg.adam_beta2);
    nn::FloatVec grad(params.size());
    Rng rng = make_rng(seed, "train-stage-" + std::to_string(stage));
    std::vector<GanLogEntry> log;
    const Int3 psize = patch3d_size(cfg, ref);

    for (int it = 0; it < cfg.iterations; ++it) {
        GanLogEntry entry;
        entry.stage = stage;
        entry.iteration = it;
        for (int c = 0; c < cfg.n_critic; ++c) {
            const NoiseGrid z = sample_noise(cfg.n_z, cfg.noise_extent, rng);
            const FeatureGrid fake = generate(stack, z, stage);

            std::vector<nn::Tensor> real_p, fake_p;
            for (int b = 0; b < cfg.batch2d; ++b) {
                fake_p.push_back(render_random_patch(fake, cfg, pose_model, stage, rng));
                real_p.push_back(render_random_patch(ref, cfg, pose_model, stage, rng));
            }
            critics.critic2d.zero_grad();
            entry.critic2d = critic_loss_wgan(critics.critic2d, real_p, fake_p, weights.gp_lambda, rng, true).total;
            critics.critic2d.step();

            real_p.clear();
            fake_p.clear();
            for (int b = 0; b < cfg.batch3d; ++b) {
                fake_p.push_back(patch_to_tensor(random_patch_3d(fake, psize, rng)));
                real_p.push_back(patch_to_tensor(random_patch_3d(ref, psize, rng)));
            }
            critics.critic3d.zero_grad();
            entry.critic3d = critic_loss_wgan(critics.critic3d, real_p, fake_p, weights.gp_lambda, rng, true).total;
            critics.critic3d.step();
            check_finite(entry.critic2d, "2D critic loss", stage, it);
            check_finite(entry.critic3d, "3D critic loss", stage, it);
        }

        std::fill(grad.begin(), grad.end(), 0.0f);
        entry.gen = generator_objective(stack, stage, ref, critics.critic2d, critics.critic3d, weights, pose_model,
                                        rng(), &grad);
        check_finite(entry.gen.total, "generator loss", stage, it);
        adam.step(params, grad);

        if (it % std::max(1, cfg.log_every) == 0 || it + 1 == cfg.iterations) {
            log.push_back(entry);
            if (on_log) on_log(entry);
        }
    }
    return log;
}

std::string sha256_hex(const void* data, size_t size) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (!EVP_Digest(data, size, md, &len, EVP_sha256(), nullptr)) throw Error("sha256: digest failed");
    std::ostringstream os;
    for (unsigned int n = 0; n < len; ++n) os << std::hex << std::setw(2) << std::setfill('0') << int(md[n]);
    return os.str();
}

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

void write_file(const std::filesystem::path& path, const void* data, size_t size) {
    std::ofstream out(path, std::ios::binary);
    out.write(static_cast<const char*>(data), std::streamsize(size));
    if (!out) throw IoError("cannot write " + path.string());
}

const char* kind_name(nn::LayerKind k) { return k == nn::LayerKind::upconv2 ? "upconv2" : "conv"; }

} // namespace

std::string sha256_file(const std::filesystem::path& path) {
    const std::string bytes = read_file(path);
    return sha256_hex(bytes.data(), bytes.size());
}

std::string stage_param_hash(const GeneratorStack& stack, int stage) {
    const nn::FloatVec& p = stack.stages.at(stage).params();
    return sha256_hex(p.data(), p.size() * sizeof(float));
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("save_checkpoint: cannot create " + dir.string());
    const GeneratorStack& s = ckpt.stack;

    json doc;
    doc["format"] = kCheckpointFormat;
    doc["gan_config"] = to_json(s.cfg);
    doc["loss_weights"] = to_json(ckpt.weights);
    doc["aabb_min"] = {s.aabb_min.x(), s.aabb_min.y(), s.aabb_min.z()};
    doc["aabb_max"] = {s.aabb_max.x(), s.aabb_max.y(), s.aabb_max.z()};
    write_file(dir / "zstar.bin", s.z_star.v.data(), s.z_star.size() * sizeof(float));
    doc["z_star"] = {{"file", "zstar.bin"}, {"shape", {s.z_star.c, s.z_star.d, s.z_star.h, s.z_star.w}}};
    json stages = json::array();
    for (int k = 0; k < s.built_stages(); ++k) {
        const nn::ConvNet& net = s.stages[k];
        const std::string file = "stage_" + std::to_string(k) + ".bin";
        write_file(dir / file, net.params().data(), net.params().size() * sizeof(float));
        json layers = json::array();
        for (const nn::LayerSpec& l : net.layers())
            layers.push_back({{"kind", kind_name(l.kind)},
                              {"in", l.in},
                              {"out", l.out},
                              {"kernel", {l.kd, l.kh, l.kw}},
                              {"weight_offset", l.w_off},
                              {"bias_offset", l.b_off}});
        stages.push_back({{"file", file},
                          {"frozen", bool(s.frozen[k])},
                          {"param_count", net.params().size()},
                          {"output_activation", net.output_activation() == nn::OutputActivation::tanh ? "tanh" : "none"},
                          {"leaky_slope", net.leaky_slope()},
                          {"layers", layers},
                          {"sha256", stage_param_hash(s, k)}});
    }
    doc["stages"] = stages;
    try {
        doc["training"] = json::parse(ckpt.training_config_json);
    } catch (const json::exception&) {
        throw PreconditionError("save_checkpoint: training config is not valid JSON");
    }
    const std::string text = doc.dump(2) + "\n";
    write_file(dir / "checkpoint.json", text.data(), text.size());
}

Checkpoint load_checkpoint(const std::filesystem::path& dir) {
    const std::filesystem::path manifest = dir / "checkpoint.json";
    if (!std::filesystem::exists(manifest)) throw IoError("load_checkpoint: no checkpoint at " + dir.string());
    json doc;
    try {
        doc = json::parse(read_file(manifest));
    } catch (const json::exception& e) {
        throw SchemaError(std::string("load_checkpoint: invalid JSON: ") + e.what());
    }
    if (doc.value("format", std::string()) != kCheckpointFormat)
        throw SchemaError("load_checkpoint: unsupported format (expected " + std::string(kCheckpointFormat) + ")");

    Checkpoint ck;
    try {
        GanConfig cfg;
        overlay(cfg, doc.at("gan_config"), "gan_config");
        overlay(ck.weights, doc.at("loss_weights"), "loss_weights");
        GeneratorStack& s = ck.stack;
        s.cfg = cfg;
        const auto lo = doc.at("aabb_min").get<std::vector<double>>();
        const auto hi = doc.at("aabb_max").get<std::vector<double>>();
        s.aabb_min = Vec3(lo.at(0), lo.at(1), lo.at(2));
        s.aabb_max = Vec3(hi.at(0), hi.at(1), hi.at(2));

        const auto shape = doc.at("z_star").at("shape").get<std::vector<int>>();
        s.z_star = nn::Tensor(shape.at(0), shape.at(1), shape.at(2), shape.at(3));
        const std::string zbytes = read_file(dir / doc.at("z_star").at("file").get<std::string>());
        if (zbytes.size() != s.z_star.size() * sizeof(float)) throw SchemaError("load_checkpoint: zstar.bin size mismatch");
        std::memcpy(s.z_star.v.data(), zbytes.data(), zbytes.size());

        for (const json& st : doc.at("stages")) {
            std::vector<nn::LayerSpec> layers;
            for (const json& lj : st.at("layers")) {
                nn::LayerSpec l;
                const std::string kind = lj.at("kind").get<std::string>();
                if (kind != "conv" && kind != "upconv2") throw SchemaError("load_checkpoint: unknown layer kind " + kind);
                l.kind = kind == "conv" ? nn::LayerKind::conv : nn::LayerKind::upconv2;
                l.in = lj.at("in").get<int>();
                l.out = lj.at("out").get<int>();
                const auto kern = lj.at("kernel").get<std::vector<int>>();
                l.kd = kern.at(0);
                l.kh = kern.at(1);
                l.kw = kern.at(2);
                l.w_off = lj.at("weight_offset").get<size_t>();
                l.b_off = lj.at("bias_offset").get<size_t>();
                layers.push_back(l);
            }
            const std::string bytes = read_file(dir / st.at("file").get<std::string>());
            nn::FloatVec params(st.at("param_count").get<size_t>());
            if (bytes.size() != params.size() * sizeof(float))
                throw SchemaError("load_checkpoint: parameter blob size mismatch");
            std::memcpy(params.data(), bytes.data(), bytes.size());
            const auto act = st.at("output_activation").get<std::string>() == "tanh" ? nn::OutputActivation::tanh
                                                                                       : nn::OutputActivation::none;
            s.stages.push_back(nn::ConvNet::from_parts(std::move(layers), std::move(params), act,
                                                       st.at("leaky_slope").get<float>()));
            s.frozen.push_back(st.at("frozen").get<bool>());
            if (st.contains("sha256") && st["sha256"].get<std::string>() != stage_param_hash(s, s.built_stages() - 1))
                throw SchemaError("load_checkpoint: stage " + std::to_string(s.built_stages() - 1) +
                                  " parameters do not match their recorded hash");
        }
        if (doc.contains("training")) ck.training_config_json = doc["training"].dump();
    } catch (const json::exception& e) {
        throw SchemaError(std::string("load_checkpoint: malformed manifest: ") + e.what());
    }
    return ck;
}

std::string checkpoint_hash(const std::filesystem::path& dir) {
    const Checkpoint ck = load_checkpoint(dir);
    std::string all = read_file(dir / "checkpoint.json");
    all += read_file(dir / "zstar.bin");
    for (int k = 0; k < ck.stack.built_stages(); ++k) all += read_file(dir / ("stage_" + std::to_string(k) + ".bin"));
    return sha256_hex(all.data(), all.size());
}

} // namespace remix3d
