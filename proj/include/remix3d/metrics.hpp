// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "remix3d/nn.hpp"
#include "remix3d/relu_field.hpp"
#include "remix3d/remix_gan.hpp"
#include "remix3d/renderer.hpp"

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <utility>
#include <string>

namespace remix3d {

struct MetricsConfig {
    int n_views = 16;
    int n_seeds = 16;
    uint64_t master_seed = 0;
    RenderConfig render; // evaluation defaults: 256 midpoint samples, black background
    /// Side of the square diversity patch (clipped to the image).
    int diversity_patch = 32;
};

struct GaussianStats {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Per-location features of an image: a fixed two-layer conv net (3 -> 64 ->
/// 64, 3x3, leaky ReLU between) with weights drawn from a fixed seed, or a
/// user-supplied network.
class FeatureExtractor {
public:
    /// The default "random-v1" extractor.
    FeatureExtractor();
    FeatureExtractor(nn::ConvNet net, std::string name);

    /// Rows are pixel locations, columns feature channels.
    Eigen::MatrixXd features(const Image& img) const;
    /// Mean and covariance (normalized by N-1) over the image's locations.
    GaussianStats stats(const Image& img) const;

    int dimension() const;
    const std::string& name() const { return name_; }

private:
    nn::ConvNet net_;
    std::string name_;
};

/// |mu1 - mu2|^2 + Tr(C1 + C2 - 2 (C1 C2)^{1/2}), clamped at 0.
double frechet_distance(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& cov1, const Eigen::VectorXd& mu2,
                        const Eigen::MatrixXd& cov2);

/// Produces a generated grid for a seed.
using SceneSampler = std::function<FeatureGrid(uint64_t seed)>;

/// Samples z from `seed` at the training extent and decodes it with every
/// built stage.
SceneSampler stack_sampler(const GeneratorStack& stack);

/// Mean over n_views cameras (drawn from the pose model at its last stage)
/// of the Frechet distance between feature statistics of the reference render
/// and the render of one fixed-seed generated grid. Lower is better.
double visual_quality(const FeatureGrid& reference, const SceneSampler& sampler, const PoseModel& pose_model,
                      int n_views, const MetricsConfig& cfg, const FeatureExtractor& extractor = {});
double visual_quality(const FeatureGrid& reference, const GeneratorStack& stack, const PoseModel& pose_model,
                      int n_views, const MetricsConfig& cfg, const FeatureExtractor& extractor = {});

struct DiversitySpec {
    Camera camera;
    PatchWindow window;
};

/// Fixed view and centered patch derived from the master seed.
DiversitySpec default_diversity_spec(const PoseModel& pose_model, const MetricsConfig& cfg);

/// Mean over pixels and channels of the across-sample population variance.
double patch_variance(std::span<const Image> samples);

/// Renders one patch window from one camera for n_seeds independent seeds and
/// returns patch_variance over them. Higher is more diverse.
double scene_diversity(const SceneSampler& sampler, const DiversitySpec& spec, int n_seeds, const MetricsConfig& cfg);
double scene_diversity(const GeneratorStack& stack, const PoseModel& pose_model, const DiversitySpec& spec,
                       int n_seeds, const MetricsConfig& cfg);

struct EvaluationReport {
    double visual_quality = 0.0;
    double scene_diversity = 0.0;
    int n_views = 0;
    int n_seeds = 0;
    std::string extractor;
    int feature_dimension = 0;
    uint64_t master_seed = 0;
    std::string checkpoint_hash;
    std::string config_hash;
};

EvaluationReport evaluate_report(const FeatureGrid& reference, const GeneratorStack& stack,
                                 const PoseModel& pose_model, const MetricsConfig& cfg,
                                 const std::string& checkpoint_hash);

std::string report_to_json(const EvaluationReport& r);

} // namespace remix3d
