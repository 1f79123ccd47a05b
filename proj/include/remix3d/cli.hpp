// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "remix3d/metrics.hpp"
#include "remix3d/reconstruction.hpp"
#include "remix3d/remix_gan.hpp"
#include "remix3d/renderer.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace remix3d {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

struct SceneSpec {
    std::string kind = "boxes";
    int count = 20;
    int views = 16;
    int image_size = 64;
    int resolution = 64;
};

/// Camera distribution overrides; zero radius means 2.5x the AABB half-diagonal.
struct PoseSpec {
    double radius = 0.0;
    double elevation_min_deg = 15.0;
    double elevation_max_deg = 75.0;
};

struct RunPaths {
    std::string dataset;    // manifest.json
    std::string reference;  // RFG1 grid
    std::string checkpoint; // checkpoint directory
    std::string grid;       // RFG1 grid to render
};

/// Everything a command needs. Serialized as one JSON document; unknown keys
/// are rejected and missing keys keep their defaults.
struct RunConfig {
    uint64_t master_seed = 0;
    SceneSpec scene;
    ReconConfig recon;
    GanConfig gan;
    LossWeights loss;
    RenderConfig render;
    MetricsConfig metrics;
    PoseSpec pose;
    RunPaths paths;
};

nlohmann::json to_json(const RunConfig& c);
void overlay(RunConfig& c, const nlohmann::json& j);

/// Applies `key.path=value` to a JSON document; the value is parsed as JSON and
/// falls back to a plain string.
void apply_assignment(nlohmann::json& doc, const std::string& assignment);

PoseModel make_pose_model(const PoseSpec& spec, const Vec3& aabb_min, const Vec3& aabb_max, const Camera& exemplar,
                          int stages);

nlohmann::json pose_to_json(const PoseModel& m);
PoseModel pose_from_json(const nlohmann::json& j);

/// Entry point of the remix3d tool; returns the process exit code.
int run_cli(int argc, const char* const* argv);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace remix3d
