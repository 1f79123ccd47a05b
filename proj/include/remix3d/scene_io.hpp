// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "remix3d/camera.hpp"
#include "remix3d/image.hpp"
#include "remix3d/relu_field.hpp"
#include "remix3d/renderer.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace remix3d {

namespace fs = std::filesystem;

struct PosedImageSet {
    std::vector<Image> images;
    std::vector<Camera> cameras;

    size_t size() const { return images.size(); }
    /// Throws PreconditionError unless n >= 1, counts agree, sizes agree and
    /// every camera is valid.
    void validate() const;
};

/// Reads a pose manifest (JSON) and the PNG files it lists. Pixels are
/// returned as linear RGB; "srgb" manifests are converted on load.
PosedImageSet load_dataset(const fs::path& manifest_path);

/// Writes `<dir>/manifest.json` plus one 8-bit PNG per frame (linear color
/// space). Returns the manifest path.
fs::path save_dataset(const PosedImageSet& set, const fs::path& dir);

/// 8-bit RGB PNG helpers. Values are clamped to [0,1] and rounded on write.
void write_png(const Image& image, const fs::path& path);
Image read_png(const fs::path& path);
uint8_t quantize_8bit(double v);

double srgb_to_linear(double v);

/// RFG1 binary grid files.
void write_grid(const FeatureGrid& grid, const fs::path& path);
FeatureGrid read_grid(const fs::path& path);
/// The exact RFG1 byte stream (what write_grid puts on disk).
std::string serialize_grid(const FeatureGrid& grid);

enum class PrimitiveKind { box, sphere };
enum class SceneKind { boxes, spheres, mixed };

SceneKind parse_scene_kind(const std::string& s);
std::string to_string(SceneKind kind);

struct Primitive {
    PrimitiveKind kind = PrimitiveKind::box;
    Vec3 center = Vec3::Zero();
    Vec3 extent = Vec3::Zero(); // half extents for boxes; extent.x() is the radius for spheres
    Vec3 color = Vec3::Zero();

    bool contains(const Vec3& p) const;
};

struct SyntheticScene {
    FeatureGrid ground_truth_grid;
    std::vector<Primitive> primitives;
    uint64_t rng_seed = 0;
};

/// Places `count` primitives uniformly at random inside [-1,1]^3 and voxelizes
/// them on a resolution^3 grid: raw density +1 at nodes inside a primitive,
/// -1 elsewhere; raw color is the palette color of the last primitive covering
/// the node.
SyntheticScene make_synthetic_scene(SceneKind kind, int count, int resolution, uint64_t rng_seed);

/// Fixed palette used for primitive colors.
const std::vector<Vec3>& scene_palette();

/// Renders `n_views` hemisphere views of the ground-truth grid with the
/// evaluation render config (256 deterministic midpoint samples, black
/// background).
PosedImageSet render_dataset(const SyntheticScene& scene, int n_views, int image_size, uint64_t rng_seed);

} // namespace remix3d
