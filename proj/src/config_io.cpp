// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#include "remix3d/config_io.hpp"

namespace remix3d {

using nlohmann::json;

namespace {

json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

json int3_json(const Int3& v) { return {v[0], v[1], v[2]}; }

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(where + "." + key + ": wrong type");
    }
}

void read_vec3(const json& j, const char* key, Vec3& out, const std::string& where) {
    if (!j.contains(key)) return;
    const json& a = j.at(key);
    if (!a.is_array() || a.size() != 3 || !a[0].is_number() || !a[1].is_number() || !a[2].is_number())
        throw SchemaError(where + "." + key + ": expected an array of 3 numbers");
    out = Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
}

void read_int3(const json& j, const char* key, Int3& out, const std::string& where) {
    if (!j.contains(key)) return;
    const json& a = j.at(key);
    if (a.is_number_integer()) {
        const int n = a.get<int>();
        out = {n, n, n};
        return;
    }
    if (!a.is_array() || a.size() != 3 || !a[0].is_number_integer() || !a[1].is_number_integer() ||
        !a[2].is_number_integer())
        throw SchemaError(where + "." + key + ": expected an integer or an array of 3 integers");
    out = {a[0].get<int>(), a[1].get<int>(), a[2].get<int>()};
}

void require_object(const json& j, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + ": expected a JSON object");
}

} // namespace

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    require_object(j, where);
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) known = known || it.key() == k;
        if (!known) throw SchemaError(where + ": unknown key \"" + it.key() + "\"");
    }
}

std::string to_string(SamplingPolicy p) {
    switch (p) {
    case SamplingPolicy::stratified: return "stratified";
    case SamplingPolicy::uniform_jitter: return "uniform_jitter";
    case SamplingPolicy::deterministic_midpoint: return "deterministic_midpoint";
    }
    return "?";
}

SamplingPolicy parse_sampling_policy(const std::string& s) {
    if (s == "stratified") return SamplingPolicy::stratified;
    if (s == "uniform_jitter") return SamplingPolicy::uniform_jitter;
    if (s == "deterministic_midpoint") return SamplingPolicy::deterministic_midpoint;
    throw SchemaError("unknown sampling policy \"" + s + "\"");
}

json to_json(const RenderConfig& c) {
    return {{"samples_per_ray", c.samples_per_ray},
            {"density_scale", c.density_scale},
            {"background_rgb", vec3_json(c.background_rgb)},
            {"policy", to_string(c.policy)},
            {"seed", c.seed}};
}

void overlay(RenderConfig& c, const json& j, const std::string& where) {
    reject_unknown_keys(j, {"samples_per_ray", "density_scale", "background_rgb", "policy", "seed"}, where);
    read(j, "samples_per_ray", c.samples_per_ray, where);
    read(j, "density_scale", c.density_scale, where);
    read_vec3(j, "background_rgb", c.background_rgb, where);
    if (j.contains("policy")) {
        std::string p;
        read(j, "policy", p, where);
        c.policy = parse_sampling_policy(p);
    }
    read(j, "seed", c.seed, where);
}

json to_json(const ReconConfig& c) {
    return {{"final_resolution", int3_json(c.final_resolution)},
            {"start_divisor", c.start_divisor},
            {"rays_per_batch", c.rays_per_batch},
            {"batches_per_level", c.batches_per_level},
            {"learning_rate", c.learning_rate},
            {"adam_beta1", c.adam_beta1},
            {"adam_beta2", c.adam_beta2},
            {"adam_eps", c.adam_eps},
            {"lr_decay", c.lr_decay},
            {"samples_per_ray", c.samples_per_ray},
            {"policy", to_string(c.policy)},
            {"density_scale", c.density_scale},
            {"aabb_min", vec3_json(c.aabb_min)},
            {"aabb_max", vec3_json(c.aabb_max)},
            {"log_every", c.log_every}};
}

void overlay(ReconConfig& c, const json& j, const std::string& where) {
    reject_unknown_keys(j,
                        {"final_resolution", "start_divisor", "rays_per_batch", "batches_per_level", "learning_rate",
                         "adam_beta1", "adam_beta2", "adam_eps", "lr_decay", "samples_per_ray", "policy",
                         "density_scale", "aabb_min", "aabb_max", "log_every"},
                        where);
    read_int3(j, "final_resolution", c.final_resolution, where);
    read(j, "start_divisor", c.start_divisor, where);
    read(j, "rays_per_batch", c.rays_per_batch, where);
    read(j, "batches_per_level", c.batches_per_level, where);
    read(j, "learning_rate", c.learning_rate, where);
    read(j, "adam_beta1", c.adam_beta1, where);
    read(j, "adam_beta2", c.adam_beta2, where);
    read(j, "adam_eps", c.adam_eps, where);
    read(j, "lr_decay", c.lr_decay, where);
    read(j, "samples_per_ray", c.samples_per_ray, where);
    if (j.contains("policy")) {
        std::string p;
        read(j, "policy", p, where);
        c.policy = parse_sampling_policy(p);
    }
    read(j, "density_scale", c.density_scale, where);
    read_vec3(j, "aabb_min", c.aabb_min, where);
    read_vec3(j, "aabb_max", c.aabb_max, where);
    read(j, "log_every", c.log_every, where);
}

json to_json(const GanConfig& c) {
    return {{"n_z", c.n_z},
            {"stages", c.stages},
            {"noise_extent", int3_json(c.noise_extent)},
            {"gen_width", c.gen_width},
            {"gen_layers", c.gen_layers},
            {"critic_width", c.critic_width},
            {"critic_layers", c.critic_layers},
            {"leaky_slope", c.leaky_slope},
            {"patch3d", c.patch3d},
            {"patch2d", c.patch2d},
            {"batch2d", c.batch2d},
            {"batch3d", c.batch3d},
            {"n_critic", c.n_critic},
            {"iterations", c.iterations},
            {"lr_critic", c.lr_critic},
            {"lr_gen", c.lr_gen},
            {"adam_beta1", c.adam_beta1},
            {"adam_beta2", c.adam_beta2},
            {"samples_per_ray", c.samples_per_ray},
            {"density_scale", c.density_scale},
            {"log_every", c.log_every}};
}

void overlay(GanConfig& c, const json& j, const std::string& where) {
    reject_unknown_keys(j,
                        {"n_z", "stages", "noise_extent", "gen_width", "gen_layers", "critic_width", "critic_layers",
                         "leaky_slope", "patch3d", "patch2d", "batch2d", "batch3d", "n_critic", "iterations",
                         "lr_critic", "lr_gen", "adam_beta1", "adam_beta2", "samples_per_ray", "density_scale",
                         "log_every"},
                        where);
    read(j, "n_z", c.n_z, where);
    read(j, "stages", c.stages, where);
    read_int3(j, "noise_extent", c.noise_extent, where);
    read(j, "gen_width", c.gen_width, where);
    read(j, "gen_layers", c.gen_layers, where);
    read(j, "critic_width", c.critic_width, where);
    read(j, "critic_layers", c.critic_layers, where);
    read(j, "leaky_slope", c.leaky_slope, where);
    read(j, "patch3d", c.patch3d, where);
    read(j, "patch2d", c.patch2d, where);
    read(j, "batch2d", c.batch2d, where);
    read(j, "batch3d", c.batch3d, where);
    read(j, "n_critic", c.n_critic, where);
    read(j, "iterations", c.iterations, where);
    read(j, "lr_critic", c.lr_critic, where);
    read(j, "lr_gen", c.lr_gen, where);
    read(j, "adam_beta1", c.adam_beta1, where);
    read(j, "adam_beta2", c.adam_beta2, where);
    read(j, "samples_per_ray", c.samples_per_ray, where);
    read(j, "density_scale", c.density_scale, where);
    read(j, "log_every", c.log_every, where);
}

json to_json(const LossWeights& c) {
    return {{"gamma2d", c.gamma2d},
            {"gamma3d", c.gamma3d},
            {"rho2d", c.rho2d},
            {"rho3d", c.rho3d},
            {"gp_lambda", c.gp_lambda}};
}

void overlay(LossWeights& c, const json& j, const std::string& where) {
    reject_unknown_keys(j, {"gamma2d", "gamma3d", "rho2d", "rho3d", "gp_lambda"}, where);
    read(j, "gamma2d", c.gamma2d, where);
    read(j, "gamma3d", c.gamma3d, where);
    read(j, "rho2d", c.rho2d, where);
    read(j, "rho3d", c.rho3d, where);
    read(j, "gp_lambda", c.gp_lambda, where);
}

json to_json(const MetricsConfig& c) {
    return {{"n_views", c.n_views},
            {"n_seeds", c.n_seeds},
            {"master_seed", c.master_seed},
            {"render", to_json(c.render)},
            {"diversity_patch", c.diversity_patch}};
}

void overlay(MetricsConfig& c, const json& j, const std::string& where) {
    reject_unknown_keys(j, {"n_views", "n_seeds", "master_seed", "render", "diversity_patch"}, where);
    read(j, "n_views", c.n_views, where);
    read(j, "n_seeds", c.n_seeds, where);
    read(j, "master_seed", c.master_seed, where);
    if (j.contains("render")) overlay(c.render, j.at("render"), where + ".render");
    read(j, "diversity_patch", c.diversity_patch, where);
}

} // namespace remix3d
