// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "remix3d/adam.hpp"
#include "remix3d/nn.hpp"
#include "remix3d/relu_field.hpp"
#include "remix3d/renderer.hpp"

#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace remix3d {

/// Architecture and optimization settings of the generator and critics.
struct GanConfig {
    int n_z = 4;
    int stages = 4;
    /// Spatial extent (x, y, z) of the stage-0 noise grid. Stage k outputs
    /// noise_extent * 2^(k+1) nodes per axis.
    Int3 noise_extent{8, 8, 8};
    int gen_width = 32;
    int gen_layers = 5;
    int critic_width = 32;
    int critic_layers = 5;
    float leaky_slope = 0.2f;
    int patch3d = 12;
    int patch2d = 48;
    int batch2d = 4;
    int batch3d = 4;
    int n_critic = 3;
    int iterations = 20000;
    double lr_critic = 5e-4;
    double lr_gen = 5e-4;
    double adam_beta1 = 0.5;
    double adam_beta2 = 0.9;
    int samples_per_ray = 128;
    double density_scale = 0.0;
    int log_every = 50;

    void validate() const;
    Int3 stage_dims(int stage) const { return stage_dims(stage, noise_extent); }
    static Int3 stage_dims(int stage, Int3 noise_extent);
};

/// Smallest admissible noise extent per axis.
inline constexpr int kMinNoiseExtent = 2;

/// Noise extent that makes the last stage match `reference_dims`; throws if
/// the dimensions are not divisible by 2^stages.
Int3 noise_extent_for(Int3 reference_dims, int stages);

struct LossWeights {
    double gamma2d = 1.0;
    double gamma3d = 1.0;
    double rho2d = 10.0;
    double rho3d = 10.0;
    double gp_lambda = 10.0;

    void validate() const;
};

using NoiseGrid = nn::Tensor; // [n_z, z, y, x]

NoiseGrid sample_noise(int n_z, Int3 extent, Rng& rng);

/// Progressive generator: stage 0 decodes the noise grid (one 2x transposed
/// conv followed by 3^3 convs, tanh output); stage k > 0 refines the
/// upsampled previous output with a residual computed from it and per-stage
/// noise, clamped to [-1, 1].
class GeneratorStack {
public:
    GanConfig cfg;
    Vec3 aabb_min = Vec3::Constant(-1.0);
    Vec3 aabb_max = Vec3::Constant(1.0);
    std::vector<nn::ConvNet> stages;
    std::vector<bool> frozen;
    NoiseGrid z_star;

    /// Creates an empty stack and draws the reconstruction seed z*. The AABB
    /// belongs to the training-shape output.
    static GeneratorStack create(const GanConfig& cfg, const Vec3& aabb_min, const Vec3& aabb_max, uint64_t seed);

    /// Appends the next stage network (initialized from `seed`).
    void add_stage(uint64_t seed);
    void freeze(int stage);
    int built_stages() const { return int(stages.size()); }

    /// AABB of grids decoded from noise of the given extent: the training AABB
    /// for the training extent, otherwise scaled per axis by the extent ratio
    /// around the same center.
    std::pair<Vec3, Vec3> aabb_for(Int3 noise_extent) const;
};

/// Per-stage noise for stage k, derived deterministically from (z, k).
NoiseGrid stage_noise(const NoiseGrid& z, int stage, Int3 dims);

/// State needed to backpropagate into the parameters of the last generated stage.
struct GenerateTrace {
    int stage = 0;
    nn::Trace net;
    nn::FloatVec pre_clamp; // up + residual (stages > 0)
};

FeatureGrid generate(const GeneratorStack& stack, const NoiseGrid& z, int up_to_stage, GenerateTrace* trace = nullptr);

/// Accumulates into `grad` (parameters of stage `trace.stage`) the gradient
/// given d(loss)/d(grid raw values).
void generate_backward(const GeneratorStack& stack, const GenerateTrace& trace, const std::vector<double>& d_grid,
                       nn::FloatVec& grad);

/// Samples z with the given spatial extent and decodes it with all stages.
FeatureGrid retarget(const GeneratorStack& stack, Int3 noise_extent, Rng& rng);

/// Scalar critic over a patch tensor.
class Critic {
public:
    virtual ~Critic() = default;
    virtual double score(const nn::Tensor& x) = 0;
    /// Score and its gradient w.r.t. the input.
    virtual double score_with_input_grad(const nn::Tensor& x, nn::Tensor& dx) = 0;
    /// Adds weight * d score(x) / d params to the parameter gradient.
    virtual void accumulate_score_grad(const nn::Tensor& /*x*/, double /*weight*/) {}
    /// Adds weight * d <v, grad_x score(x)> / d params to the parameter gradient.
    virtual void accumulate_directional_grad(const nn::Tensor& /*x*/, const nn::Tensor& /*v*/, double /*weight*/) {}
};

/// Conv critic: conv stack ending in one channel, averaged over all positions.
class ConvCritic final : public Critic {
public:
    ConvCritic() = default;
    /// `dims` is 2 (3-channel images) or 3 (4-channel grid patches).
    ConvCritic(int dims, int in_channels, int width, int layers, float leaky_slope, const GanConfig& cfg, uint64_t seed);

    double score(const nn::Tensor& x) override;
    double score_with_input_grad(const nn::Tensor& x, nn::Tensor& dx) override;
    void accumulate_score_grad(const nn::Tensor& x, double weight) override;
    void accumulate_directional_grad(const nn::Tensor& x, const nn::Tensor& v, double weight) override;

    void zero_grad();
    void step();

    nn::ConvNet net;
    nn::FloatVec grad;

private:
    Adam<float> adam_;
};

struct CriticPair {
    ConvCritic critic2d;
    ConvCritic critic3d;
};

CriticPair make_critics(const GanConfig& cfg, uint64_t seed);

struct WganTerms {
    double wasserstein = 0.0; // mean critic(fake) - mean critic(real)
    double penalty = 0.0;     // mean (|grad| - 1)^2 on interpolates
    double total = 0.0;       // wasserstein + lambda * penalty
};

/// WGAN-GP critic objective. When `accumulate_grads` is set the parameter
/// gradient of `total` is added to the critic.
WganTerms critic_loss_wgan(Critic& critic, std::span<const nn::Tensor> real, std::span<const nn::Tensor> fake,
                           double gp_lambda, Rng& rng, bool accumulate_grads = false);

/// -mean critic(fake).
double generator_adv_loss(Critic& critic, std::span<const nn::Tensor> fake);

nn::Tensor image_to_tensor(const Image& img);
nn::Tensor patch_to_tensor(const GridPatch& patch);

struct GeneratorLossTerms {
    double adv2d = 0.0;
    double adv3d = 0.0;
    double rec2d = 0.0;
    double rec3d = 0.0;
    double total = 0.0;
};

/// Full generator objective at `stage`:
///   gamma2d * adv2d + gamma3d * adv3d + rho2d * rec2d + rho3d * rec3d
/// with adversarial terms on fresh (z, pose, patch) draws from `seed`, rec2d the
/// patch MSE between renders of G(z*) and of the reference under one pose, and
/// rec3d the grid MSE of G(z*) against the reference. `reference` must have
/// the stage's resolution. When `stage_grad` is given the gradient w.r.t. the
/// stage parameters is accumulated into it.
GeneratorLossTerms generator_objective(const GeneratorStack& stack, int stage, const FeatureGrid& reference,
                                       Critic& critic2d, Critic& critic3d, const LossWeights& weights,
                                       const PoseModel& pose_model, uint64_t seed,
                                       nn::FloatVec* stage_grad = nullptr);

double total_generator_loss(const GeneratorStack& stack, int stage, const FeatureGrid& reference, Critic& critic2d,
                            Critic& critic3d, const LossWeights& weights, const PoseModel& pose_model, uint64_t seed);

/// Reference for a stage: repeated 2x average pooling of the full-resolution grid.
FeatureGrid stage_reference(const FeatureGrid& reference, Int3 stage_dims);

struct GanLogEntry {
    int stage = 0;
    int iteration = 0;
    double critic2d = 0.0;
    double critic3d = 0.0;
    GeneratorLossTerms gen;
};

/// Trains stage `stage` (which must be the last built, unfrozen stage; all
/// earlier stages frozen) for cfg.iterations iterations of n_critic critic
/// updates followed by one generator update. Only the stage's parameters and
/// the critics change. Throws NumericalAbort on a non-finite loss.
std::vector<GanLogEntry> train_stage(GeneratorStack& stack, CriticPair& critics, const FeatureGrid& reference,
                                     const PoseModel& pose_model, const LossWeights& weights, int stage, uint64_t seed,
                                     const std::function<void(const GanLogEntry&)>& on_log = {});

/// Lowercase hex SHA-256.
std::string sha256_hex(const void* data, size_t size);
std::string sha256_file(const std::filesystem::path& path);
/// SHA-256 of a stage's serialized (float32 little-endian) parameters.
std::string stage_param_hash(const GeneratorStack& stack, int stage);

inline constexpr const char* kCheckpointFormat = "3ingan-ckpt-v1";

struct Checkpoint {
    GeneratorStack stack;
    LossWeights weights;
    /// Free-form training configuration snapshot (stored verbatim).
    std::string training_config_json = "{}";
};

/// Writes checkpoint.json, stage_<k>.bin and zstar.bin into `dir`.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& dir);
Checkpoint load_checkpoint(const std::filesystem::path& dir);
/// SHA-256 over the checkpoint's files in a fixed order.
std::string checkpoint_hash(const std::filesystem::path& dir);

} // namespace remix3d
