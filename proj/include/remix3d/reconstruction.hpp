// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "remix3d/adam.hpp"
#include "remix3d/relu_field.hpp"
#include "remix3d/renderer.hpp"
#include "remix3d/scene_io.hpp"

#include <functional>
#include <vector>

namespace remix3d {

struct ReconConfig {
    Int3 final_resolution{128, 128, 128};
    int start_divisor = 16;
    int rays_per_batch = 2048;
    int batches_per_level = 20000;
    double learning_rate = 0.03;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    /// Learning-rate multiplier applied at each new level.
    double lr_decay = 0.5;
    int samples_per_ray = 128;
    SamplingPolicy policy = SamplingPolicy::stratified;
    double density_scale = 0.0; // <= 0: 25 / AABB diagonal
    Vec3 aabb_min = Vec3::Constant(-1.0);
    Vec3 aabb_max = Vec3::Constant(1.0);
    /// Record a log entry every this many batches (the last batch of a level
    /// is always logged).
    int log_every = 100;

    void validate() const;
    /// Per-level grid resolutions, coarsest first.
    std::vector<Int3> level_resolutions() const;
};

struct TrainingLogEntry {
    int level = 0;
    int batch = 0;
    double loss = 0.0;
};

struct ReconProgress {
    std::vector<TrainingLogEntry> log;
    /// Mean batch loss over the last 10% of each level's batches.
    std::vector<double> level_losses;
};

/// Coarse-to-fine photometric fit of a FeatureGrid to posed images. Throws
/// NumericalAbort naming the level and batch if a batch loss is not finite.
FeatureGrid reconstruct(const PosedImageSet& dataset, const ReconConfig& cfg, uint64_t seed,
                        ReconProgress* progress = nullptr);

/// Reported when the two images are identical.
inline constexpr double kPsnrIdentical = 99.0;

/// 10 log10(1 / mse) over all pixels and channels.
double psnr(const Image& a, const Image& b);

} // namespace remix3d
