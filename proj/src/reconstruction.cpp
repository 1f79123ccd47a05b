// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#include "remix3d/reconstruction.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace remix3d {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// Initial raw values: faintly occupied, mid-grey. Both sit inside the active
// region of the clamp so every channel receives gradient from the first batch.
constexpr Raw4 kInitialRaw = {0.1, 0.5, 0.5, 0.5};

} // namespace

void ReconConfig::validate() const {
    if (!is_power_of_two(start_divisor)) throw PreconditionError("ReconConfig: start_divisor must be a power of two");
    for (int a = 0; a < 3; ++a) {
        if (final_resolution[a] % start_divisor != 0)
            throw PreconditionError("ReconConfig: start_divisor must divide final_resolution");
        if (final_resolution[a] / start_divisor < 2)
            throw PreconditionError("ReconConfig: coarsest level needs at least 2 nodes per axis");
    }
    if (rays_per_batch < 1) throw PreconditionError("ReconConfig: rays_per_batch must be >= 1");
    if (batches_per_level < 1) throw PreconditionError("ReconConfig: batches_per_level must be >= 1");
    if (!(learning_rate > 0.0)) throw PreconditionError("ReconConfig: learning_rate must be positive");
    if (samples_per_ray < 2) throw PreconditionError("ReconConfig: samples_per_ray must be >= 2");
    if (!(aabb_min.array() < aabb_max.array()).all()) throw PreconditionError("ReconConfig: empty AABB");
}

std::vector<Int3> ReconConfig::level_resolutions() const {
    validate();
    std::vector<Int3> levels;
    Int3 res{final_resolution[0] / start_divisor, final_resolution[1] / start_divisor,
             final_resolution[2] / start_divisor};
    levels.push_back(res);
    while (res != final_resolution) {
        for (int& r : res) r *= 2;
        levels.push_back(res);
    }
    return levels;
}

FeatureGrid reconstruct(const PosedImageSet& dataset, const ReconConfig& cfg, uint64_t seed,
                        ReconProgress* progress) {
    dataset.validate();
    cfg.validate();

    const std::vector<Int3> levels = cfg.level_resolutions();
    const int width = dataset.images[0].width, height = dataset.images[0].height;
    const uint64_t pixels_per_image = uint64_t(width) * height;
    const uint64_t total_pixels = pixels_per_image * dataset.size();

    // Rays are fixed per pixel; only their sample jitter changes per batch.
    std::vector<Ray> all_rays;
    all_rays.reserve(total_pixels);
    for (size_t n = 0; n < dataset.size(); ++n)
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x) {
                Ray r = pixel_ray(dataset.cameras[n], x, y, cfg.aabb_min, cfg.aabb_max);
                r.index = n * pixels_per_image + uint64_t(y) * width + x;
                all_rays.push_back(r);
            }

    RenderConfig rcfg;
    rcfg.samples_per_ray = cfg.samples_per_ray;
    rcfg.policy = cfg.policy;
    rcfg.density_scale = cfg.density_scale;
    rcfg.background_rgb = Vec3::Zero();

    Rng rng = make_rng(seed, "reconstruct");
    std::uniform_int_distribution<uint64_t> pick(0, total_pixels - 1);

    FeatureGrid grid(levels.front(), cfg.aabb_min, cfg.aabb_max, kInitialRaw);
    double lr = cfg.learning_rate;
    std::vector<double> grad;
    std::vector<Ray> batch_rays(cfg.rays_per_batch);
    std::vector<Vec3> batch_targets(cfg.rays_per_batch);

    for (size_t level = 0; level < levels.size(); ++level) {
        if (level > 0) {
            grid = upsample2x(grid);
            lr *= cfg.lr_decay;
        }
        Adam<double> adam(grid.data.size(), lr, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps);
        grad.assign(grid.data.size(), 0.0);
        const int tail_start = cfg.batches_per_level - std::max(1, cfg.batches_per_level / 10);
        double tail_sum = 0.0;
        int tail_count = 0;

        for (int batch = 0; batch < cfg.batches_per_level; ++batch) {
            for (int r = 0; r < cfg.rays_per_batch; ++r) {
                const uint64_t flat = pick(rng);
                batch_rays[r] = all_rays[flat];
                const Image& img = dataset.images[flat / pixels_per_image];
                const uint64_t p = flat % pixels_per_image;
                const int x = int(p % width), y = int(p / width);
                batch_targets[r] = Vec3(img.at(x, y, 0), img.at(x, y, 1), img.at(x, y, 2));
            }
            rcfg.seed = derive_seed(seed, uint64_t(level) << 32 | uint64_t(batch));

            // mean over rays and channels
            const double norm = 1.0 / (3.0 * cfg.rays_per_batch);
            double sse = 0.0;
            std::fill(grad.begin(), grad.end(), 0.0);
            for (int r = 0; r < cfg.rays_per_batch; ++r)
                sse += backprop_squared_error(grid, batch_rays[r], rcfg, batch_targets[r], norm, grad);
            const double loss = sse * norm;
            if (!std::isfinite(loss)) {
                std::ostringstream os;
                os << "reconstruct: non-finite loss at level " << level << ", batch " << batch;
                throw NumericalAbort(os.str());
            }
            adam.step(grid.data, grad);
            for (double& v : grid.data) v = std::clamp(v, -1.0, 1.0);

            if (batch >= tail_start) {
                tail_sum += loss;
                ++tail_count;
            }
            if (progress && (batch % std::max(1, cfg.log_every) == 0 || batch + 1 == cfg.batches_per_level))
                progress->log.push_back({int(level), batch, loss});
        }
        if (progress) progress->level_losses.push_back(tail_sum / tail_count);
    }
    return grid;
}

double psnr(const Image& a, const Image& b) {
    if (a.width != b.width || a.height != b.height) throw PreconditionError("psnr: image shape mismatch");
    double sse = 0.0;
    for (size_t n = 0; n < a.rgb.size(); ++n) {
        const double d = a.rgb[n] - b.rgb[n];
        sse += d * d;
    }
    if (sse == 0.0) return kPsnrIdentical;
    const double mse = sse / double(a.rgb.size());
    return std::min(kPsnrIdentical, 10.0 * std::log10(1.0 / mse));
}

} // namespace remix3d
