// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "remix3d/camera.hpp"
#include "remix3d/image.hpp"
#include "remix3d/relu_field.hpp"

#include <span>
#include <vector>

namespace remix3d {

struct Ray {
    Vec3 origin = Vec3::Zero();
    Vec3 direction = Vec3::UnitZ();
    double t_near = 0.0;
    double t_far = 0.0;
    /// Seed index for per-ray jitter; the pixel index for camera rays.
    uint64_t index = 0;

    /// True when the ray misses the AABB and renders pure background.
    bool degenerate() const { return !(t_near < t_far); }
};

enum class SamplingPolicy { stratified, uniform_jitter, deterministic_midpoint };

struct RenderConfig {
    int samples_per_ray = 256;
    /// Global multiplier on activated density, 1/length. Non-positive means
    /// "use the default", 25 / AABB diagonal, resolved against the grid.
    double density_scale = 0.0;
    Vec3 background_rgb = Vec3::Zero();
    SamplingPolicy policy = SamplingPolicy::deterministic_midpoint;
    /// Combined with each ray's index to seed its jitter.
    uint64_t seed = 0;

    void validate() const;
    double resolved_density_scale(const FeatureGrid& grid) const;
};

/// Training-time defaults: 128 stratified samples per ray.
RenderConfig training_render_config(uint64_t seed = 0);

/// Slab test against [lo, hi]. Returns false on a miss.
bool intersect_aabb(const Vec3& origin, const Vec3& dir, const Vec3& lo, const Vec3& hi, double& t0, double& t1);

struct PixelCoord {
    double u = 0.0;
    double v = 0.0;
};

/// Pinhole rays through pixel centers, clipped to the grid AABB.
std::vector<Ray> generate_rays(const Camera& camera, std::span<const PixelCoord> pixels, const Vec3& aabb_min,
                               const Vec3& aabb_max);

Ray pixel_ray(const Camera& camera, int x, int y, const Vec3& aabb_min, const Vec3& aabb_max);

struct MarchResult {
    Vec3 rgb = Vec3::Zero();
    double transmittance = 1.0; // T after the last sample
    double weight_sum = 0.0;    // sum_k T_k alpha_k
};

MarchResult march_ray_detail(const FeatureGrid& grid, const Ray& ray, const RenderConfig& cfg);
Vec3 march_ray(const FeatureGrid& grid, const Ray& ray, const RenderConfig& cfg);

/// Accumulates d(loss)/d(raw grid) into `grad` given d(loss)/d(rgb) for one ray.
/// Returns the forward rgb. The sample positions are exactly those used by
/// march_ray under the same config.
Vec3 backprop_ray(const FeatureGrid& grid, const Ray& ray, const RenderConfig& cfg, const Vec3& d_rgb,
                  std::vector<double>& grad);

/// Accumulates the gradient of weight * |rgb - target|^2 for one ray and
/// returns the unweighted squared error.
double backprop_squared_error(const FeatureGrid& grid, const Ray& ray, const RenderConfig& cfg, const Vec3& target,
                              double weight, std::vector<double>& grad);

Image render_image(const FeatureGrid& grid, const Camera& camera, const RenderConfig& cfg);

struct PatchWindow {
    int x = 0, y = 0; // top-left corner
    int w = 0, h = 0;
};

/// Renders only the rays of a pixel window; identical to cropping render_image.
Image render_patch_2d(const FeatureGrid& grid, const Camera& camera, const RenderConfig& cfg, const PatchWindow& win);

/// Vector-Jacobian product of render_patch_2d: accumulates into `grad` the
/// gradient of sum(d_patch * patch) w.r.t. the raw grid.
void render_patch_vjp(const FeatureGrid& grid, const Camera& camera, const RenderConfig& cfg, const PatchWindow& win,
                      const Image& d_patch, std::vector<double>& grad);

/// Exact gradient of sum_r |march_ray(r) - target_r|^2 w.r.t. the raw grid values.
std::vector<double> grad_march(const FeatureGrid& grid, std::span<const Ray> rays, const RenderConfig& cfg,
                               std::span<const Vec3> target_rgbs, double* loss_out = nullptr);

/// Distribution of training/evaluation cameras on an upper hemisphere (+z up)
/// looking at `center`, with a per-stage focal length.
struct PoseModel {
    Vec3 center = Vec3::Zero();
    double radius = 1.0;
    double elevation_lo = 0.0;
    double elevation_hi = 0.0;
    std::vector<double> focal_schedule;
    int width = 1, height = 1;
    Vec2 principal_point = Vec2::Zero();

    void validate() const;
};

/// Default hemisphere around `grid`'s AABB: radius 2.5x the half diagonal,
/// elevation in [15, 75] degrees, focal linear from 0.5x to 1x the exemplar
/// focal across `stages` (last entry is exactly the exemplar focal).
PoseModel default_pose_model(const Vec3& aabb_min, const Vec3& aabb_max, const Camera& exemplar, int stages);

/// Focal length that frames the default hemisphere for a square image.
double default_focal(int image_size);

Camera sample_pose(const PoseModel& model, int stage, Rng& rng, double* azimuth_out = nullptr);

/// Cameras evenly spaced in azimuth at the middle elevation.
std::vector<Camera> orbit_cameras(const PoseModel& model, int stage, int n_frames);

} // namespace remix3d
