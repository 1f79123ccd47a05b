// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#include "remix3d/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace remix3d {

void RenderConfig::validate() const {
    if (samples_per_ray < 2) throw PreconditionError("RenderConfig: samples_per_ray must be >= 2");
    if (!std::isfinite(density_scale)) throw PreconditionError("RenderConfig: density_scale must be finite");
}

double RenderConfig::resolved_density_scale(const FeatureGrid& grid) const {
    if (density_scale > 0.0) return density_scale;
    return 25.0 / (grid.aabb_max - grid.aabb_min).norm();
}

RenderConfig training_render_config(uint64_t seed) {
    RenderConfig cfg;
    cfg.samples_per_ray = 128;
    cfg.policy = SamplingPolicy::stratified;
    cfg.seed = seed;
    return cfg;
}

bool intersect_aabb(const Vec3& o, const Vec3& d, const Vec3& lo, const Vec3& hi, double& t0, double& t1) {
    t0 = 0.0;
    t1 = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        if (d[a] == 0.0) {
            if (o[a] < lo[a] || o[a] > hi[a]) return false;
            continue;
        }
        const double inv = 1.0 / d[a];
        double ta = (lo[a] - o[a]) * inv;
        double tb = (hi[a] - o[a]) * inv;
        if (ta > tb) std::swap(ta, tb);
        t0 = std::max(t0, ta);
        t1 = std::min(t1, tb);
        if (t0 >= t1) return false;
    }
    return true;
}

namespace {

Ray make_ray(const Camera& cam, double u, double v, uint64_t index, const Vec3& lo, const Vec3& hi) {
    const Vec3 dir_cam((u + 0.5 - cam.principal_point.x()) / cam.focal, (v + 0.5 - cam.principal_point.y()) / cam.focal,
                       1.0);
    Ray r;
    r.origin = cam.center();
    r.direction = (cam.rotation.transpose() * dir_cam).normalized();
    r.index = index;
    double t0, t1;
    if (intersect_aabb(r.origin, r.direction, lo, hi, t0, t1)) {
        r.t_near = t0;
        r.t_far = t1;
    } else {
        r.t_near = r.t_far = 0.0;
    }
    return r;
}

// Counter-based uniform in [0, 1): jitter k of a ray is a pure function of the
// ray seed and k.
double unit_double(uint64_t seed, uint64_t k) { return double(mix64(seed + k) >> 11) * 0x1.0p-53; }

// Fills `ts` with the sample distances along a non-degenerate ray; returns the
// per-sample segment length.
double sample_distances(const Ray& ray, const RenderConfig& cfg, std::vector<double>& ts) {
    const int n = cfg.samples_per_ray;
    const double delta = (ray.t_far - ray.t_near) / n;
    ts.resize(n);
    switch (cfg.policy) {
    case SamplingPolicy::deterministic_midpoint:
        for (int k = 0; k < n; ++k) ts[k] = ray.t_near + (k + 0.5) * delta;
        break;
    case SamplingPolicy::stratified: {
        const uint64_t base = derive_seed(cfg.seed, ray.index);
        for (int k = 0; k < n; ++k) ts[k] = ray.t_near + (k + unit_double(base, uint64_t(k))) * delta;
        break;
    }
    case SamplingPolicy::uniform_jitter: {
        const double u = unit_double(derive_seed(cfg.seed, ray.index), 0);
        for (int k = 0; k < n; ++k) ts[k] = ray.t_near + (k + u) * delta;
        break;
    }
    }
    return delta;
}

struct SampleRecord {
    TrilerpStencil stencil;
    Raw4 raw{};
    double trans_before = 1.0;
    double trans_after = 1.0;
    double weight = 0.0;
};

} // namespace

std::vector<Ray> generate_rays(const Camera& camera, std::span<const PixelCoord> pixels, const Vec3& aabb_min,
                               const Vec3& aabb_max) {
    std::vector<Ray> rays;
    rays.reserve(pixels.size());
    for (const PixelCoord& p : pixels) {
        if (p.u < 0.0 || p.v < 0.0 || p.u >= camera.width || p.v >= camera.height)
            throw PreconditionError("generate_rays: pixel outside the image");
        const uint64_t index = uint64_t(std::floor(p.v)) * camera.width + uint64_t(std::floor(p.u));
        rays.push_back(make_ray(camera, p.u, p.v, index, aabb_min, aabb_max));
    }
    return rays;
}

Ray pixel_ray(const Camera& camera, int x, int y, const Vec3& aabb_min, const Vec3& aabb_max) {
    return make_ray(camera, x, y, uint64_t(y) * camera.width + x, aabb_min, aabb_max);
}

MarchResult march_ray_detail(const FeatureGrid& grid, const Ray& ray, const RenderConfig& cfg) {
    MarchResult out;
    if (ray.degenerate()) {
        out.rgb = cfg.background_rgb;
        return out;
    }
    thread_local std::vector<double> ts;
    const double delta = sample_distances(ray, cfg, ts);
    const double scale = cfg.resolved_density_scale(grid);
    double trans = 1.0;
    for (double t : ts) {
        const FieldSample s = field_eval(grid, ray.origin + t * ray.direction);
        if (s.density <= 0.0) continue;
        const double alpha = 1.0 - std::exp(-s.density * scale * delta);
        const double w = trans * alpha;
        out.rgb += w * s.rgb;
        out.weight_sum += w;
        trans *= 1.0 - alpha;
    }
    out.transmittance = trans;
    out.rgb += trans * cfg.background_rgb;
    return out;
}

Vec3 march_ray(const FeatureGrid& grid, const Ray& ray, const RenderConfig& cfg) {
    return march_ray_detail(grid, ray, cfg).rgb;
}

namespace {

// Forward pass with per-sample records, then reverse accumulation. The
// upstream gradient is requested from `upstream(rgb)` once the forward color is
// known, so squared-error callers need a single march.
template <class Upstream>
Vec3 backprop_impl(const FeatureGrid& grid, const Ray& ray, const RenderConfig& cfg, Upstream&& upstream,
                   std::vector<double>& grad) {
    if (ray.degenerate()) {
        upstream(cfg.background_rgb);
        return cfg.background_rgb;
    }
    thread_local std::vector<double> ts;
    thread_local std::vector<SampleRecord> recs;
    const double delta = sample_distances(ray, cfg, ts);
    const double scale = cfg.resolved_density_scale(grid);
    const size_t plane = grid.voxel_count();

    recs.clear();
    double trans = 1.0;
    Vec3 rgb = Vec3::Zero();
    for (double t : ts) {
        SampleRecord r;
        r.stencil = trilerp_stencil(grid, ray.origin + t * ray.direction);
        if (!r.stencil.inside) continue;
        for (int corner = 0; corner < 8; ++corner)
            for (int c = 0; c < 4; ++c) r.raw[c] += r.stencil.weight[corner] * grid.data[r.stencil.node[corner] + c * plane];
        const double sigma = activate(r.raw[0]);
        if (sigma <= 0.0) continue; // no contribution and zero subgradient
        const double alpha = 1.0 - std::exp(-sigma * scale * delta);
        r.trans_before = trans;
        r.weight = trans * alpha;
        trans *= 1.0 - alpha;
        r.trans_after = trans;
        rgb += r.weight * Vec3(activate(r.raw[1]), activate(r.raw[2]), activate(r.raw[3]));
        recs.push_back(r);
    }
    rgb += trans * cfg.background_rgb;
    const Vec3 d_rgb = upstream(rgb);

    // suffix radiance behind sample k, starting with the background term
    double suffix = trans * d_rgb.dot(cfg.background_rgb);
    for (auto it = recs.rbegin(); it != recs.rend(); ++it) {
        const SampleRecord& r = *it;
        const Vec3 color(activate(r.raw[1]), activate(r.raw[2]), activate(r.raw[3]));
        const double g_color = d_rgb.dot(color);
        double d_raw[4] = {0.0, 0.0, 0.0, 0.0};
        if (r.raw[0] < 1.0) d_raw[0] = scale * delta * (r.trans_after * g_color - suffix);
        for (int c = 1; c < 4; ++c)
            if (r.raw[c] > 0.0 && r.raw[c] < 1.0) d_raw[c] = r.weight * d_rgb[c - 1];
        for (int corner = 0; corner < 8; ++corner) {
            const double w = r.stencil.weight[corner];
            if (w == 0.0) continue;
            for (int c = 0; c < 4; ++c)
                if (d_raw[c] != 0.0) grad[r.stencil.node[corner] + c * plane] += w * d_raw[c];
        }
        suffix += r.weight * g_color;
    }
    return rgb;
}

} // namespace

Vec3 backprop_ray(const FeatureGrid& grid, const Ray& ray, const RenderConfig& cfg, const Vec3& d_rgb,
                  std::vector<double>& grad) {
    return backprop_impl(grid, ray, cfg, [&](const Vec3&) { return d_rgb; }, grad);
}

double backprop_squared_error(const FeatureGrid& grid, const Ray& ray, const RenderConfig& cfg, const Vec3& target,
                              double weight, std::vector<double>& grad) {
    double err = 0.0;
    backprop_impl(
        grid, ray, cfg,
        [&](const Vec3& rgb) {
            const Vec3 resid = rgb - target;
            err = resid.squaredNorm();
            return Vec3(2.0 * weight * resid);
        },
        grad);
    return err;
}

Image render_image(const FeatureGrid& grid, const Camera& camera, const RenderConfig& cfg) {
    return render_patch_2d(grid, camera, cfg, {0, 0, camera.width, camera.height});
}

namespace {

void check_window(const Camera& camera, const PatchWindow& win) {
    if (win.w <= 0 || win.h <= 0 || win.x < 0 || win.y < 0 || win.x + win.w > camera.width ||
        win.y + win.h > camera.height)
        throw PreconditionError("render_patch_2d: patch window outside the image");
}

} // namespace

Image render_patch_2d(const FeatureGrid& grid, const Camera& camera, const RenderConfig& cfg, const PatchWindow& win) {
    cfg.validate();
    check_window(camera, win);
    Image out(win.w, win.h);
    for (int y = 0; y < win.h; ++y)
        for (int x = 0; x < win.w; ++x) {
            const Vec3 c = march_ray(grid, pixel_ray(camera, win.x + x, win.y + y, grid.aabb_min, grid.aabb_max), cfg);
            for (int ch = 0; ch < 3; ++ch) out.at(x, y, ch) = c[ch];
        }
    return out;
}

void render_patch_vjp(const FeatureGrid& grid, const Camera& camera, const RenderConfig& cfg, const PatchWindow& win,
                      const Image& d_patch, std::vector<double>& grad) {
    cfg.validate();
    check_window(camera, win);
    if (d_patch.width != win.w || d_patch.height != win.h)
        throw PreconditionError("render_patch_vjp: upstream gradient shape mismatch");
    if (grad.size() != grid.data.size()) throw PreconditionError("render_patch_vjp: gradient buffer size mismatch");
    for (int y = 0; y < win.h; ++y)
        for (int x = 0; x < win.w; ++x) {
            const Vec3 g(d_patch.at(x, y, 0), d_patch.at(x, y, 1), d_patch.at(x, y, 2));
            if (g.isZero(0.0)) continue;
            backprop_ray(grid, pixel_ray(camera, win.x + x, win.y + y, grid.aabb_min, grid.aabb_max), cfg, g, grad);
        }
}

std::vector<double> grad_march(const FeatureGrid& grid, std::span<const Ray> rays, const RenderConfig& cfg,
                               std::span<const Vec3> target_rgbs, double* loss_out) {
    cfg.validate();
    if (rays.size() != target_rgbs.size()) throw PreconditionError("grad_march: rays/targets length mismatch");
    std::vector<double> grad(grid.data.size(), 0.0);
    double loss = 0.0;
    for (size_t r = 0; r < rays.size(); ++r) loss += backprop_squared_error(grid, rays[r], cfg, target_rgbs[r], 1.0, grad);
    if (loss_out) *loss_out = loss;
    return grad;
}

void PoseModel::validate() const {
    if (!(radius > 0.0)) throw PreconditionError("PoseModel: radius must be positive");
    if (focal_schedule.empty()) throw PreconditionError("PoseModel: empty focal schedule");
    if (elevation_lo > elevation_hi) throw PreconditionError("PoseModel: elevation range is inverted");
    if (width <= 0 || height <= 0) throw PreconditionError("PoseModel: image size must be positive");
}

double default_focal(int image_size) { return double(image_size); }

PoseModel default_pose_model(const Vec3& aabb_min, const Vec3& aabb_max, const Camera& exemplar, int stages) {
    if (stages < 1) throw PreconditionError("default_pose_model: need at least one stage");
    PoseModel m;
    m.center = 0.5 * (aabb_min + aabb_max);
    m.radius = 2.5 * 0.5 * (aabb_max - aabb_min).norm();
    m.elevation_lo = 15.0 * std::numbers::pi / 180.0;
    m.elevation_hi = 75.0 * std::numbers::pi / 180.0;
    m.width = exemplar.width;
    m.height = exemplar.height;
    m.principal_point = exemplar.principal_point;
    for (int s = 0; s < stages; ++s) {
        const double frac = stages == 1 ? 1.0 : double(s) / (stages - 1);
        m.focal_schedule.push_back(exemplar.focal * (0.5 + 0.5 * frac));
    }
    m.focal_schedule.back() = exemplar.focal;
    return m;
}

namespace {

Camera pose_at(const PoseModel& model, int stage, double azimuth, double elevation) {
    const Vec3 dir(std::cos(elevation) * std::cos(azimuth), std::cos(elevation) * std::sin(azimuth),
                   std::sin(elevation));
    Camera cam = look_at(model.center + model.radius * dir, model.center, Vec3::UnitZ(), model.focal_schedule[stage],
                         model.width, model.height);
    cam.principal_point = model.principal_point;
    return cam;
}

} // namespace

Camera sample_pose(const PoseModel& model, int stage, Rng& rng, double* azimuth_out) {
    model.validate();
    if (stage < 0 || stage >= int(model.focal_schedule.size()))
        throw PreconditionError("sample_pose: stage outside the focal schedule");
    const double az = std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
    const double el = std::uniform_real_distribution<double>(model.elevation_lo, model.elevation_hi)(rng);
    if (azimuth_out) *azimuth_out = az;
    return pose_at(model, stage, az, el);
}

std::vector<Camera> orbit_cameras(const PoseModel& model, int stage, int n_frames) {
    model.validate();
    if (n_frames < 1) throw PreconditionError("orbit_cameras: need at least one frame");
    const double el = 0.5 * (model.elevation_lo + model.elevation_hi);
    std::vector<Camera> cams;
    for (int f = 0; f < n_frames; ++f) cams.push_back(pose_at(model, stage, 2.0 * std::numbers::pi * f / n_frames, el));
    return cams;
}

} // namespace remix3d
