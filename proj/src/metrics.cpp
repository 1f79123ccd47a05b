// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#include "remix3d/metrics.hpp"

#include "remix3d/config_io.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>

namespace remix3d {

namespace {

constexpr uint64_t kExtractorSeed = 0x72616e646f6d7631ULL; // "randomv1"

} // namespace

FeatureExtractor::FeatureExtractor() : name_("random-v1") {
    Rng rng(kExtractorSeed);
    net_ = nn::ConvNet::make({3, 64, 64}, 1, 3, false, nn::OutputActivation::none, 0.2f, rng);
}

FeatureExtractor::FeatureExtractor(nn::ConvNet net, std::string name) : net_(std::move(net)), name_(std::move(name)) {
    if (net_.layers().empty() || net_.layers().front().in != 3)
        throw PreconditionError("FeatureExtractor: network must take 3-channel images");
    if (net_.layers().front().kind != nn::LayerKind::conv || net_.layers().front().kd != 1)
        throw PreconditionError("FeatureExtractor: network must be a 2D conv stack");
}

int FeatureExtractor::dimension() const { return net_.layers().back().out; }

Eigen::MatrixXd FeatureExtractor::features(const Image& img) const {
    const nn::Tensor y = net_.forward(image_to_tensor(img));
    const Eigen::Index n = Eigen::Index(y.plane());
    Eigen::MatrixXd f(n, y.c);
    for (int c = 0; c < y.c; ++c)
        for (Eigen::Index p = 0; p < n; ++p) f(p, c) = y.v[size_t(c) * y.plane() + p];
    return f;
}

GaussianStats FeatureExtractor::stats(const Image& img) const {
    const Eigen::MatrixXd f = features(img);
    if (f.rows() < 2) throw PreconditionError("FeatureExtractor::stats: need at least 2 locations");
    GaussianStats s;
    s.mean = f.colwise().mean().transpose();
    const Eigen::MatrixXd centered = f.rowwise() - s.mean.transpose();
    s.cov = centered.transpose() * centered / double(f.rows() - 1);
    return s;
}

namespace {

// Symmetric PSD square root with eigenvalues clipped at 0.
Eigen::MatrixXd sqrt_psd(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
    const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

// Tr((C1 C2)^{1/2}) = Tr((S C2 S)^{1/2}) with S = C1^{1/2}. Returns false
// when the symmetric product has clearly negative eigenvalues.
bool trace_sqrt_product(const Eigen::MatrixXd& c1, const Eigen::MatrixXd& c2, double& out) {
    const Eigen::MatrixXd s = sqrt_psd(c1);
    Eigen::MatrixXd m = s * c2 * s;
    m = 0.5 * (m + m.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();
    const double tol = 1e-10 * std::max(1.0, ev.cwiseAbs().maxCoeff());
    out = 0.0;
    bool ok = true;
    for (Eigen::Index n = 0; n < ev.size(); ++n) {
        if (ev[n] < -tol) ok = false;
        out += std::sqrt(std::max(ev[n], 0.0));
    }
    return ok;
}

} // namespace

double frechet_distance(const Eigen::VectorXd& mu1, const Eigen::MatrixXd& cov1, const Eigen::VectorXd& mu2,
                        const Eigen::MatrixXd& cov2) {
    const Eigen::Index d = mu1.size();
    if (mu2.size() != d || cov1.rows() != d || cov1.cols() != d || cov2.rows() != d || cov2.cols() != d)
        throw PreconditionError("frechet_distance: dimension mismatch");
    const double mean_term = (mu1 - mu2).squaredNorm();
    double tr = 0.0;
    if (!trace_sqrt_product(cov1, cov2, tr)) {
        const Eigen::MatrixXd eps = 1e-6 * Eigen::MatrixXd::Identity(d, d);
        trace_sqrt_product(cov1 + eps, cov2 + eps, tr);
    }
    return std::max(0.0, mean_term + cov1.trace() + cov2.trace() - 2.0 * tr);
}

SceneSampler stack_sampler(const GeneratorStack& stack) {
    if (stack.built_stages() == 0) throw PreconditionError("untrained stack: the generator has no stages");
    return [&stack](uint64_t seed) {
        Rng rng(seed);
        const NoiseGrid z = sample_noise(stack.cfg.n_z, stack.cfg.noise_extent, rng);
        return generate(stack, z, stack.built_stages() - 1);
    };
}

double visual_quality(const FeatureGrid& reference, const SceneSampler& sampler, const PoseModel& pose_model,
                      int n_views, const MetricsConfig& cfg, const FeatureExtractor& extractor) {
    if (n_views < 2) throw PreconditionError("visual_quality: n_views must be >= 2");
    pose_model.validate();
    cfg.render.validate();
    const int stage = int(pose_model.focal_schedule.size()) - 1;
    const FeatureGrid generated = sampler(derive_seed(cfg.master_seed, "visual-quality-sample"));
    Rng rng = make_rng(cfg.master_seed, "visual-quality-views");
    double sum = 0.0;
    for (int v = 0; v < n_views; ++v) {
        const Camera cam = sample_pose(pose_model, stage, rng);
        const GaussianStats a = extractor.stats(render_image(reference, cam, cfg.render));
        const GaussianStats b = extractor.stats(render_image(generated, cam, cfg.render));
        sum += frechet_distance(a.mean, a.cov, b.mean, b.cov);
    }
    return sum / n_views;
}

double visual_quality(const FeatureGrid& reference, const GeneratorStack& stack, const PoseModel& pose_model,
                      int n_views, const MetricsConfig& cfg, const FeatureExtractor& extractor) {
    return visual_quality(reference, stack_sampler(stack), pose_model, n_views, cfg, extractor);
}

DiversitySpec default_diversity_spec(const PoseModel& pose_model, const MetricsConfig& cfg) {
    pose_model.validate();
    Rng rng = make_rng(cfg.master_seed, "diversity-view");
    DiversitySpec spec;
    spec.camera = sample_pose(pose_model, int(pose_model.focal_schedule.size()) - 1, rng);
    spec.window.w = std::min(cfg.diversity_patch, pose_model.width);
    spec.window.h = std::min(cfg.diversity_patch, pose_model.height);
    spec.window.x = (pose_model.width - spec.window.w) / 2;
    spec.window.y = (pose_model.height - spec.window.h) / 2;
    return spec;
}

double patch_variance(std::span<const Image> samples) {
    if (samples.size() < 2) throw PreconditionError("patch_variance: need at least 2 samples");
    const size_t n = samples[0].rgb.size();
    for (const Image& s : samples)
        if (s.width != samples[0].width || s.height != samples[0].height)
            throw PreconditionError("patch_variance: sample sizes differ");
    const double inv = 1.0 / double(samples.size());
    double total = 0.0;
    for (size_t p = 0; p < n; ++p) {
        double mean = 0.0;
        for (const Image& s : samples) mean += s.rgb[p];
        mean *= inv;
        double var = 0.0;
        for (const Image& s : samples) var += (s.rgb[p] - mean) * (s.rgb[p] - mean);
        total += var * inv;
    }
    return n ? total / double(n) : 0.0;
}

double scene_diversity(const SceneSampler& sampler, const DiversitySpec& spec, int n_seeds, const MetricsConfig& cfg) {
    if (n_seeds < 2) throw PreconditionError("scene_diversity: n_seeds must be >= 2");
    cfg.render.validate();
    const uint64_t base = derive_seed(cfg.master_seed, "diversity-seeds");
    std::vector<Image> patches;
    patches.reserve(n_seeds);
    for (int s = 0; s < n_seeds; ++s)
        patches.push_back(render_patch_2d(sampler(derive_seed(base, uint64_t(s))), spec.camera, cfg.render, spec.window));
    return patch_variance(patches);
}

double scene_diversity(const GeneratorStack& stack, const PoseModel& /*pose_model*/, const DiversitySpec& spec,
                       int n_seeds, const MetricsConfig& cfg) {
    return scene_diversity(stack_sampler(stack), spec, n_seeds, cfg);
}

EvaluationReport evaluate_report(const FeatureGrid& reference, const GeneratorStack& stack,
                                 const PoseModel& pose_model, const MetricsConfig& cfg,
                                 const std::string& checkpoint_hash) {
    const FeatureExtractor extractor;
    EvaluationReport r;
    r.visual_quality = visual_quality(reference, stack, pose_model, cfg.n_views, cfg, extractor);
    r.scene_diversity = scene_diversity(stack, pose_model, default_diversity_spec(pose_model, cfg), cfg.n_seeds, cfg);
    r.n_views = cfg.n_views;
    r.n_seeds = cfg.n_seeds;
    r.extractor = extractor.name();
    r.feature_dimension = extractor.dimension();
    r.master_seed = cfg.master_seed;
    r.checkpoint_hash = checkpoint_hash;
    const std::string cfg_text = to_json(cfg).dump();
    r.config_hash = sha256_hex(cfg_text.data(), cfg_text.size());
    return r;
}

std::string report_to_json(const EvaluationReport& r) {
    const nlohmann::json j = {{"visual_quality", r.visual_quality},
                              {"scene_diversity", r.scene_diversity},
                              {"n_views", r.n_views},
                              {"n_seeds", r.n_seeds},
                              {"extractor", r.extractor},
                              {"feature_dimension", r.feature_dimension},
                              {"variance_convention", "population"},
                              {"master_seed", r.master_seed},
                              {"checkpoint_hash", r.checkpoint_hash},
                              {"config_hash", r.config_hash}};
    return j.dump(2) + "\n";
}

} // namespace remix3d
