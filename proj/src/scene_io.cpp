// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#include "remix3d/scene_io.hpp"

#include <json.hpp>
#include <png.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

namespace remix3d {

using nlohmann::json;

void PosedImageSet::validate() const {
    if (images.empty()) throw PreconditionError("PosedImageSet: at least one image is required");
    if (images.size() != cameras.size()) throw PreconditionError("PosedImageSet: image/camera count mismatch");
    for (size_t n = 0; n < images.size(); ++n) {
        if (images[n].width != images[0].width || images[n].height != images[0].height)
            throw PreconditionError("PosedImageSet: images differ in size");
        if (cameras[n].width != images[n].width || cameras[n].height != images[n].height)
            throw PreconditionError("PosedImageSet: camera size does not match image " + std::to_string(n));
        cameras[n].validate();
    }
}

uint8_t quantize_8bit(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return uint8_t(std::lround(c * 255.0));
}

double srgb_to_linear(double v) {
    return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

void write_png(const Image& image, const fs::path& path) {
    std::vector<uint8_t> bytes(image.rgb.size());
    for (size_t n = 0; n < bytes.size(); ++n) bytes[n] = quantize_8bit(image.rgb[n]);
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    img.width = image.width;
    img.height = image.height;
    img.format = PNG_FORMAT_RGB;
    if (!png_image_write_to_file(&img, path.c_str(), 0, bytes.data(), 0, nullptr))
        throw IoError("write_png: " + path.string() + ": " + img.message);
}

Image read_png(const fs::path& path) {
    png_image img;
    std::memset(&img, 0, sizeof(img));
    img.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&img, path.c_str()))
        throw IoError("read_png: " + path.string() + ": " + img.message);
    img.format = PNG_FORMAT_RGB;
    std::vector<uint8_t> bytes(PNG_IMAGE_SIZE(img));
    if (!png_image_finish_read(&img, nullptr, bytes.data(), 0, nullptr))
        throw IoError("read_png: " + path.string() + ": " + img.message);
    Image out(int(img.width), int(img.height));
    for (size_t n = 0; n < bytes.size(); ++n) out.rgb[n] = bytes[n] / 255.0;
    return out;
}

namespace {

[[noreturn]] void schema_fail(const fs::path& manifest, const std::string& what) {
    throw SchemaError("manifest " + manifest.string() + ": " + what);
}

template <class T>
T require(const json& j, const char* key, const fs::path& manifest, const std::string& where) {
    if (!j.contains(key)) schema_fail(manifest, where + ": missing key \"" + key + "\"");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        schema_fail(manifest, where + ": bad value for \"" + key + "\" (" + e.what() + ")");
    }
}

} // namespace

PosedImageSet load_dataset(const fs::path& manifest_path) {
    std::ifstream in(manifest_path);
    if (!in) throw IoError("load_dataset: cannot open " + manifest_path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        schema_fail(manifest_path, std::string("invalid JSON: ") + e.what());
    }

    const int width = require<int>(doc, "width", manifest_path, "root");
    const int height = require<int>(doc, "height", manifest_path, "root");
    const std::string space = doc.value("color_space", std::string("linear"));
    if (space != "linear" && space != "srgb") schema_fail(manifest_path, "color_space must be \"linear\" or \"srgb\"");
    if (!doc.contains("frames") || !doc["frames"].is_array()) schema_fail(manifest_path, "missing \"frames\" array");

    PosedImageSet set;
    const fs::path base = manifest_path.parent_path();
    const json& frames = doc["frames"];
    for (size_t n = 0; n < frames.size(); ++n) {
        const json& f = frames[n];
        const std::string where = "frames[" + std::to_string(n) + "]";
        Camera cam;
        cam.width = width;
        cam.height = height;
        cam.focal = require<double>(f, "focal_px", manifest_path, where);
        cam.principal_point = Vec2(require<double>(f, "cx", manifest_path, where),
                                   require<double>(f, "cy", manifest_path, where));
        const auto rot = require<std::vector<std::vector<double>>>(f, "rotation", manifest_path, where);
        const auto trans = require<std::vector<double>>(f, "translation", manifest_path, where);
        if (rot.size() != 3 || rot[0].size() != 3 || rot[1].size() != 3 || rot[2].size() != 3)
            schema_fail(manifest_path, where + ": rotation must be 3x3");
        if (trans.size() != 3) schema_fail(manifest_path, where + ": translation must have 3 entries");
        for (int r = 0; r < 3; ++r)
            for (int c = 0; c < 3; ++c) cam.rotation(r, c) = rot[r][c];
        cam.translation = Vec3(trans[0], trans[1], trans[2]);
        try {
            cam.validate();
        } catch (const PreconditionError& e) {
            schema_fail(manifest_path, where + ": " + e.what());
        }
        set.cameras.push_back(cam);

        if (f.contains("file")) {
            Image img = read_png(base / f["file"].get<std::string>());
            if (img.width != width || img.height != height)
                schema_fail(manifest_path, where + ": image size differs from the manifest");
            if (space == "srgb")
                for (double& v : img.rgb) v = srgb_to_linear(v);
            set.images.push_back(std::move(img));
        }
    }
    if (set.cameras.empty()) schema_fail(manifest_path, "no frames");
    if (set.images.size() != set.cameras.size())
        schema_fail(manifest_path, "count mismatch: " + std::to_string(set.cameras.size()) + " cameras but " +
                                       std::to_string(set.images.size()) + " images");
    return set;
}

fs::path save_dataset(const PosedImageSet& set, const fs::path& dir) {
    set.validate();
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("save_dataset: cannot create " + dir.string() + ": " + ec.message());

    json doc;
    doc["width"] = set.images[0].width;
    doc["height"] = set.images[0].height;
    doc["color_space"] = "linear";
    json frames = json::array();
    for (size_t n = 0; n < set.size(); ++n) {
        std::ostringstream name;
        name << "frame_" << std::setw(4) << std::setfill('0') << n << ".png";
        write_png(set.images[n], dir / name.str());
        const Camera& cam = set.cameras[n];
        json f;
        f["file"] = name.str();
        f["focal_px"] = cam.focal;
        f["cx"] = cam.principal_point.x();
        f["cy"] = cam.principal_point.y();
        f["rotation"] = {{cam.rotation(0, 0), cam.rotation(0, 1), cam.rotation(0, 2)},
                         {cam.rotation(1, 0), cam.rotation(1, 1), cam.rotation(1, 2)},
                         {cam.rotation(2, 0), cam.rotation(2, 1), cam.rotation(2, 2)}};
        f["translation"] = {cam.translation.x(), cam.translation.y(), cam.translation.z()};
        frames.push_back(f);
    }
    doc["frames"] = frames;
    const fs::path manifest = dir / "manifest.json";
    std::ofstream out(manifest);
    // nlohmann prints doubles with round-trip precision, so cameras reload exactly
    out << doc.dump(2) << "\n";
    if (!out) throw IoError("save_dataset: cannot write " + manifest.string());
    return manifest;
}

namespace {

static_assert(std::endian::native == std::endian::little, "RFG1 I/O assumes a little-endian host");

void put_u32(std::string& s, uint32_t v) { s.append(reinterpret_cast<const char*>(&v), 4); }
void put_f32(std::string& s, float v) { s.append(reinterpret_cast<const char*>(&v), 4); }

} // namespace

std::string serialize_grid(const FeatureGrid& grid) {
    grid.validate();
    std::string s = "RFG1";
    s.reserve(4 + 16 + 24 + grid.data.size() * 4);
    put_u32(s, uint32_t(grid.nx));
    put_u32(s, uint32_t(grid.ny));
    put_u32(s, uint32_t(grid.nz));
    put_u32(s, uint32_t(FeatureGrid::kChannels));
    for (int a = 0; a < 3; ++a) put_f32(s, float(grid.aabb_min[a]));
    for (int a = 0; a < 3; ++a) put_f32(s, float(grid.aabb_max[a]));
    for (double v : grid.data) put_f32(s, float(v));
    return s;
}

void write_grid(const FeatureGrid& grid, const fs::path& path) {
    const std::string bytes = serialize_grid(grid);
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), std::streamsize(bytes.size()));
    if (!out) throw IoError("write_grid: cannot write " + path.string());
}

FeatureGrid read_grid(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("read_grid: cannot open " + path.string());
    char magic[4];
    uint32_t header[4];
    float box[6];
    in.read(magic, 4);
    in.read(reinterpret_cast<char*>(header), sizeof(header));
    in.read(reinterpret_cast<char*>(box), sizeof(box));
    if (!in || std::memcmp(magic, "RFG1", 4) != 0) throw SchemaError("read_grid: " + path.string() + " is not RFG1");
    if (header[3] != uint32_t(FeatureGrid::kChannels))
        throw SchemaError("read_grid: expected 4 channels, found " + std::to_string(header[3]));
    if (header[0] < 2 || header[1] < 2 || header[2] < 2 || header[0] > 4096 || header[1] > 4096 || header[2] > 4096)
        throw SchemaError("read_grid: implausible dimensions");
    FeatureGrid grid({int(header[0]), int(header[1]), int(header[2])}, Vec3(box[0], box[1], box[2]),
                     Vec3(box[3], box[4], box[5]));
    std::vector<float> payload(grid.data.size());
    in.read(reinterpret_cast<char*>(payload.data()), std::streamsize(payload.size() * 4));
    if (!in) throw SchemaError("read_grid: truncated payload in " + path.string());
    std::copy(payload.begin(), payload.end(), grid.data.begin());
    try {
        grid.validate();
    } catch (const PreconditionError& e) {
        throw SchemaError(std::string("read_grid: ") + e.what());
    }
    return grid;
}

SceneKind parse_scene_kind(const std::string& s) {
    if (s == "boxes") return SceneKind::boxes;
    if (s == "spheres") return SceneKind::spheres;
    if (s == "mixed") return SceneKind::mixed;
    throw PreconditionError("unknown scene kind \"" + s + "\" (expected boxes, spheres or mixed)");
}

std::string to_string(SceneKind kind) {
    switch (kind) {
    case SceneKind::boxes: return "boxes";
    case SceneKind::spheres: return "spheres";
    case SceneKind::mixed: return "mixed";
    }
    return "?";
}

bool Primitive::contains(const Vec3& p) const {
    if (kind == PrimitiveKind::sphere) return (p - center).squaredNorm() <= extent.x() * extent.x();
    return ((p - center).cwiseAbs().array() <= extent.array()).all();
}

const std::vector<Vec3>& scene_palette() {
    static const std::vector<Vec3> palette = {
        {0.85, 0.25, 0.20}, {0.95, 0.70, 0.20}, {0.25, 0.60, 0.30}, {0.20, 0.45, 0.80},
        {0.60, 0.35, 0.70}, {0.90, 0.90, 0.85}, {0.55, 0.40, 0.25}, {0.30, 0.75, 0.75},
    };
    return palette;
}

SyntheticScene make_synthetic_scene(SceneKind kind, int count, int resolution, uint64_t rng_seed) {
    if (resolution < 16 || resolution > 256) throw PreconditionError("make_synthetic_scene: resolution must be in [16, 256]");
    if (count < 1) throw PreconditionError("make_synthetic_scene: count must be >= 1");

    SyntheticScene scene;
    scene.rng_seed = rng_seed;
    const Vec3 lo = Vec3::Constant(-1.0), hi = Vec3::Constant(1.0);
    Rng rng = make_rng(rng_seed, "synthetic-scene");
    std::uniform_real_distribution<double> size_dist(0.12, 0.35);
    std::uniform_int_distribution<int> color_dist(0, int(scene_palette().size()) - 1);
    std::bernoulli_distribution coin(0.5);

    while (int(scene.primitives.size()) < count) {
        Primitive p;
        p.kind = kind == SceneKind::boxes     ? PrimitiveKind::box
                 : kind == SceneKind::spheres ? PrimitiveKind::sphere
                                              : (coin(rng) ? PrimitiveKind::box : PrimitiveKind::sphere);
        if (p.kind == PrimitiveKind::box) {
            p.extent = Vec3(size_dist(rng), size_dist(rng), size_dist(rng));
        } else {
            const double r = size_dist(rng);
            p.extent = Vec3(r, r, r);
        }
        for (int a = 0; a < 3; ++a) p.center[a] = std::uniform_real_distribution<double>(lo[a], hi[a])(rng);
        p.color = scene_palette()[color_dist(rng)];
        // rejection: the primitive's bounding box must fit inside the AABB
        if (((p.center - p.extent).array() < lo.array()).any() || ((p.center + p.extent).array() > hi.array()).any())
            continue;
        scene.primitives.push_back(p);
    }

    FeatureGrid grid({resolution, resolution, resolution}, lo, hi);
    for (int k = 0; k < resolution; ++k)
        for (int j = 0; j < resolution; ++j)
            for (int i = 0; i < resolution; ++i) {
                const Vec3 pos = grid.node_position(i, j, k);
                for (const Primitive& p : scene.primitives) {
                    if (!p.contains(pos)) continue;
                    grid.at(0, i, j, k) = 1.0;
                    for (int c = 0; c < 3; ++c) grid.at(c + 1, i, j, k) = p.color[c];
                }
            }
    scene.ground_truth_grid = std::move(grid);
    return scene;
}

PosedImageSet render_dataset(const SyntheticScene& scene, int n_views, int image_size, uint64_t rng_seed) {
    if (n_views < 1) throw PreconditionError("render_dataset: n_views must be >= 1");
    if (image_size < 1) throw PreconditionError("render_dataset: image_size must be >= 1");
    const FeatureGrid& grid = scene.ground_truth_grid;
    Camera exemplar;
    exemplar.width = exemplar.height = image_size;
    exemplar.focal = default_focal(image_size);
    exemplar.principal_point = Vec2(0.5 * image_size, 0.5 * image_size);
    const PoseModel pose = default_pose_model(grid.aabb_min, grid.aabb_max, exemplar, 1);

    RenderConfig cfg; // evaluation defaults
    Rng rng = make_rng(rng_seed, "render-dataset");
    PosedImageSet set;
    for (int v = 0; v < n_views; ++v) {
        Camera cam = sample_pose(pose, 0, rng);
        set.images.push_back(render_image(grid, cam, cfg));
        set.cameras.push_back(cam);
    }
    return set;
}

} // namespace remix3d
