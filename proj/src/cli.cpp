// Copyright Contributors to the remix3d Project
// SPDX-License-Identifier: Apache-2.0

#include "remix3d/cli.hpp"

#include "remix3d/config_io.hpp"
#include "remix3d/scene_io.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>

namespace remix3d {

using nlohmann::json;

namespace {

json vec3_json(const Vec3& v) { return {v.x(), v.y(), v.z()}; }

Vec3 vec3_from(const json& j) { return Vec3(j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()); }

template <class T>
void read(const json& j, const char* key, T& out, const std::string& where) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception&) {
        throw SchemaError(where + "." + key + ": wrong type");
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    f << text;
    if (!f) throw IoError("cannot write " + path.string());
}

json read_json_file(const fs::path& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path.string());
    try {
        return json::parse(f);
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": invalid JSON: " + e.what());
    }
}

} // namespace

json to_json(const RunConfig& c) {
    return {{"master_seed", c.master_seed},
            {"scene",
             {{"kind", c.scene.kind},
              {"count", c.scene.count},
              {"views", c.scene.views},
              {"image_size", c.scene.image_size},
              {"resolution", c.scene.resolution}}},
            {"recon", to_json(c.recon)},
            {"gan", to_json(c.gan)},
            {"loss", to_json(c.loss)},
            {"render", to_json(c.render)},
            {"metrics", to_json(c.metrics)},
            {"pose",
             {{"radius", c.pose.radius},
              {"elevation_min_deg", c.pose.elevation_min_deg},
              {"elevation_max_deg", c.pose.elevation_max_deg}}},
            {"paths",
             {{"dataset", c.paths.dataset},
              {"reference", c.paths.reference},
              {"checkpoint", c.paths.checkpoint},
              {"grid", c.paths.grid}}}};
}

void overlay(RunConfig& c, const json& j) {
    reject_unknown_keys(j, {"master_seed", "scene", "recon", "gan", "loss", "render", "metrics", "pose", "paths"},
                        "config");
    read(j, "master_seed", c.master_seed, "config");
    if (j.contains("scene")) {
        const json& s = j["scene"];
        reject_unknown_keys(s, {"kind", "count", "views", "image_size", "resolution"}, "config.scene");
        read(s, "kind", c.scene.kind, "config.scene");
        read(s, "count", c.scene.count, "config.scene");
        read(s, "views", c.scene.views, "config.scene");
        read(s, "image_size", c.scene.image_size, "config.scene");
        read(s, "resolution", c.scene.resolution, "config.scene");
    }
    if (j.contains("recon")) overlay(c.recon, j["recon"], "config.recon");
    if (j.contains("gan")) overlay(c.gan, j["gan"], "config.gan");
    if (j.contains("loss")) overlay(c.loss, j["loss"], "config.loss");
    if (j.contains("render")) overlay(c.render, j["render"], "config.render");
    if (j.contains("metrics")) overlay(c.metrics, j["metrics"], "config.metrics");
    if (j.contains("pose")) {
        const json& p = j["pose"];
        reject_unknown_keys(p, {"radius", "elevation_min_deg", "elevation_max_deg"}, "config.pose");
        read(p, "radius", c.pose.radius, "config.pose");
        read(p, "elevation_min_deg", c.pose.elevation_min_deg, "config.pose");
        read(p, "elevation_max_deg", c.pose.elevation_max_deg, "config.pose");
    }
    if (j.contains("paths")) {
        const json& p = j["paths"];
        reject_unknown_keys(p, {"dataset", "reference", "checkpoint", "grid"}, "config.paths");
        read(p, "dataset", c.paths.dataset, "config.paths");
        read(p, "reference", c.paths.reference, "config.paths");
        read(p, "checkpoint", c.paths.checkpoint, "config.paths");
        read(p, "grid", c.paths.grid, "config.paths");
    }
}

void apply_assignment(json& doc, const std::string& assignment) {
    const size_t eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) throw SchemaError("--set expects key.path=value, got \"" + assignment + "\"");
    const std::string key = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    json* node = &doc;
    std::istringstream parts(key);
    std::string part;
    std::vector<std::string> path;
    while (std::getline(parts, part, '.')) path.push_back(part);
    for (size_t n = 0; n + 1 < path.size(); ++n) {
        if (!node->is_object()) *node = json::object();
        node = &(*node)[path[n]];
    }
    if (!node->is_object()) *node = json::object();
    json value;
    try {
        value = json::parse(text);
    } catch (const json::exception&) {
        value = text;
    }
    (*node)[path.back()] = value;
}

PoseModel make_pose_model(const PoseSpec& spec, const Vec3& aabb_min, const Vec3& aabb_max, const Camera& exemplar,
                          int stages) {
    PoseModel m = default_pose_model(aabb_min, aabb_max, exemplar, stages);
    if (spec.radius > 0.0) m.radius = spec.radius;
    m.elevation_lo = spec.elevation_min_deg * std::numbers::pi / 180.0;
    m.elevation_hi = spec.elevation_max_deg * std::numbers::pi / 180.0;
    m.validate();
    return m;
}

json pose_to_json(const PoseModel& m) {
    return {{"center", vec3_json(m.center)},
            {"radius", m.radius},
            {"elevation_lo", m.elevation_lo},
            {"elevation_hi", m.elevation_hi},
            {"focal_schedule", m.focal_schedule},
            {"width", m.width},
            {"height", m.height},
            {"principal_point", {m.principal_point.x(), m.principal_point.y()}}};
}

PoseModel pose_from_json(const json& j) {
    try {
        PoseModel m;
        m.center = vec3_from(j.at("center"));
        m.radius = j.at("radius").get<double>();
        m.elevation_lo = j.at("elevation_lo").get<double>();
        m.elevation_hi = j.at("elevation_hi").get<double>();
        m.focal_schedule = j.at("focal_schedule").get<std::vector<double>>();
        m.width = j.at("width").get<int>();
        m.height = j.at("height").get<int>();
        m.principal_point = Vec2(j.at("principal_point").at(0).get<double>(), j.at("principal_point").at(1).get<double>());
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw SchemaError(std::string("pose model: ") + e.what());
    }
}

namespace {

struct Context {
    RunConfig run;
    fs::path out;
    std::ostream& log;
};

Camera default_exemplar(int image_size) {
    Camera c;
    c.width = c.height = image_size;
    c.focal = default_focal(image_size);
    c.principal_point = Vec2(0.5 * image_size, 0.5 * image_size);
    return c;
}

std::string require_path(const std::string& p, const char* what) {
    if (p.empty()) throw SchemaError(std::string("missing ") + what);
    return p;
}

std::string grid_hash(const FeatureGrid& g) {
    const std::string bytes = serialize_grid(g);
    return sha256_hex(bytes.data(), bytes.size());
}

Int3 parse_shape(const std::string& s) {
    Int3 v{};
    char x1 = 0, x2 = 0;
    std::istringstream in(s);
    if (!(in >> v[0] >> x1 >> v[1] >> x2 >> v[2]) || x1 != 'x' || x2 != 'x' || !in.eof() || v[0] < 1 || v[1] < 1 ||
        v[2] < 1)
        throw SchemaError("shape must look like AxBxC with positive integers, got \"" + s + "\"");
    return v;
}

void cmd_make_scene(Context& ctx) {
    const RunConfig& r = ctx.run;
    const SceneKind kind = parse_scene_kind(r.scene.kind);
    const SyntheticScene scene =
        make_synthetic_scene(kind, r.scene.count, r.scene.resolution, derive_seed(r.master_seed, "scene"));
    const PosedImageSet set = render_dataset(scene, r.scene.views, r.scene.image_size, derive_seed(r.master_seed, "views"));
    save_dataset(set, ctx.out);
    write_grid(scene.ground_truth_grid, ctx.out / "ground_truth.rfg");
    ctx.log << "wrote " << set.size() << " views and ground_truth.rfg to " << ctx.out.string() << "\n";
}

void cmd_reconstruct(Context& ctx) {
    const RunConfig& r = ctx.run;
    const PosedImageSet set = load_dataset(require_path(r.paths.dataset, "dataset manifest (--dataset)"));
    std::ostringstream levels;
    for (const Int3& d : r.recon.level_resolutions()) levels << " " << d[0] << "x" << d[1] << "x" << d[2];
    ctx.log << "levels:" << levels.str() << "\n";

    ReconProgress progress;
    const FeatureGrid grid = reconstruct(set, r.recon, derive_seed(r.master_seed, "reconstruct"), &progress);
    write_grid(grid, ctx.out / "reference.rfg");

    std::string log_text;
    for (const TrainingLogEntry& e : progress.log)
        log_text += json{{"level", e.level}, {"batch", e.batch}, {"loss", e.loss}}.dump() + "\n";
    write_text(ctx.out / "training_log.jsonl", log_text);

    RenderConfig eval = r.render;
    double sum = 0.0;
    for (size_t v = 0; v < set.size(); ++v) sum += psnr(render_image(grid, set.cameras[v], eval), set.images[v]);
    const double mean_psnr = sum / double(set.size());
    json summary = {{"levels", json::array()}, {"level_losses", progress.level_losses}, {"psnr", mean_psnr}};
    for (const Int3& d : r.recon.level_resolutions()) summary["levels"].push_back({d[0], d[1], d[2]});
    write_text(ctx.out / "reconstruction.json", summary.dump(2) + "\n");
    ctx.log << "final PSNR over training views: " << mean_psnr << " dB\n";
}

void write_train_log(std::ofstream& f, const GanLogEntry& e) {
    f << json{{"stage", e.stage},
              {"iteration", e.iteration},
              {"critic2d", e.critic2d},
              {"critic3d", e.critic3d},
              {"adv2d", e.gen.adv2d},
              {"adv3d", e.gen.adv3d},
              {"rec2d", e.gen.rec2d},
              {"rec3d", e.gen.rec3d},
              {"gen", e.gen.total}}
             .dump()
      << "\n";
    f.flush();
}

void cmd_train(Context& ctx, int until_stage) {
    RunConfig& r = ctx.run;
    const std::string ref_path = require_path(r.paths.reference, "reference grid (--reference)");
    const FeatureGrid reference = read_grid(ref_path);
    r.gan.noise_extent = noise_extent_for(reference.dims(), r.gan.stages);
    r.gan.validate();
    const Camera exemplar = r.paths.dataset.empty() ? default_exemplar(r.scene.image_size)
                                                    : load_dataset(r.paths.dataset).cameras.at(0);
    const PoseModel pose = make_pose_model(r.pose, reference.aabb_min, reference.aabb_max, exemplar, r.gan.stages);

    Checkpoint ckpt;
    if (fs::exists(ctx.out / "checkpoint.json")) {
        ckpt = load_checkpoint(ctx.out);
        if (to_json(ckpt.stack.cfg) != to_json(r.gan) || to_json(ckpt.weights) != to_json(r.loss))
            throw SchemaError("existing checkpoint in " + ctx.out.string() + " was trained with a different configuration");
        for (int k = 0; k < ckpt.stack.built_stages(); ++k)
            if (!ckpt.stack.frozen[k]) throw SchemaError("checkpoint stage " + std::to_string(k) + " is incomplete");
        ctx.log << "resuming after stage " << ckpt.stack.built_stages() - 1 << "\n";
    } else {
        ckpt.stack = GeneratorStack::create(r.gan, reference.aabb_min, reference.aabb_max,
                                            derive_seed(r.master_seed, "generator"));
        ckpt.weights = r.loss;
    }
    ckpt.training_config_json = json{{"master_seed", r.master_seed},
                                     {"pose", pose_to_json(pose)},
                                     {"reference", ref_path},
                                     {"reference_sha256", grid_hash(reference)}}
                                    .dump();

    std::ofstream log_file(ctx.out / "train_log.jsonl", std::ios::app);
    const int last = until_stage < 0 ? r.gan.stages - 1 : std::min(until_stage, r.gan.stages - 1);
    for (int k = ckpt.stack.built_stages(); k <= last; ++k) {
        const std::string tag = std::to_string(k);
        ckpt.stack.add_stage(derive_seed(r.master_seed, "generator"));
        CriticPair critics = make_critics(r.gan, derive_seed(r.master_seed, "critics-" + tag));
        train_stage(ckpt.stack, critics, reference, pose, r.loss, k, derive_seed(r.master_seed, "train-" + tag),
                    [&](const GanLogEntry& e) {
                        write_train_log(log_file, e);
                        ctx.log << "stage " << e.stage << " it " << e.iteration << " D2 " << e.critic2d << " D3 "
                                << e.critic3d << " G " << e.gen.total << "\n";
                    });
        ckpt.stack.freeze(k);
        save_checkpoint(ckpt, ctx.out);
        ctx.log << "stage " << k << " done, sha256 " << stage_param_hash(ckpt.stack, k) << "\n";
    }
}

PosedImageSet render_views(const FeatureGrid& grid, const std::vector<Camera>& cams, const RenderConfig& cfg) {
    PosedImageSet set;
    for (const Camera& c : cams) {
        set.images.push_back(render_image(grid, c, cfg));
        set.cameras.push_back(c);
    }
    return set;
}

void cmd_sample(Context& ctx, const std::string& shape, int frames) {
    const RunConfig& r = ctx.run;
    const fs::path dir = require_path(r.paths.checkpoint, "checkpoint directory (--checkpoint)");
    const Checkpoint ckpt = load_checkpoint(dir);
    const GeneratorStack& stack = ckpt.stack;
    PoseModel pose = pose_from_json(json::parse(ckpt.training_config_json).at("pose"));

    Int3 mult{1, 1, 1};
    if (!shape.empty()) mult = parse_shape(shape);
    Int3 extent{};
    for (int a = 0; a < 3; ++a) extent[a] = stack.cfg.noise_extent[a] * mult[a];
    Rng rng = make_rng(r.master_seed, "sample");
    const FeatureGrid generated = retarget(stack, extent, rng);
    const fs::path grid_path = ctx.out / "sample.rfg";
    write_grid(generated, grid_path);
    // frames come from the stored grid so that any of them can be re-rendered from the file
    const FeatureGrid grid = read_grid(grid_path);
    const std::string hash = grid_hash(grid);
    ctx.log << "grid " << grid.nx << "x" << grid.ny << "x" << grid.nz << " sha256 " << hash << "\n";

    pose.center = grid.center();
    pose.radius *= double(*std::max_element(mult.begin(), mult.end()));
    const int stage = int(pose.focal_schedule.size()) - 1;
    const PosedImageSet set = render_views(grid, orbit_cameras(pose, stage, frames), r.render);
    save_dataset(set, ctx.out / "frames");
    write_text(ctx.out / "sample.json", json{{"grid", "sample.rfg"},
                                             {"grid_sha256", hash},
                                             {"dims", {grid.nx, grid.ny, grid.nz}},
                                             {"noise_extent", {extent[0], extent[1], extent[2]}},
                                             {"master_seed", r.master_seed},
                                             {"render", to_json(r.render)},
                                             {"frames", frames}}
                                                .dump(2) +
                                            "\n");
}

void cmd_render(Context& ctx, int frames) {
    const RunConfig& r = ctx.run;
    const FeatureGrid grid = read_grid(require_path(r.paths.grid, "grid file (--grid)"));
    std::vector<Camera> cams;
    if (!r.paths.dataset.empty()) {
        cams = load_dataset(r.paths.dataset).cameras;
    } else {
        const PoseModel pose = make_pose_model(r.pose, grid.aabb_min, grid.aabb_max, default_exemplar(r.scene.image_size), 1);
        cams = orbit_cameras(pose, 0, frames);
    }
    save_dataset(render_views(grid, cams, r.render), ctx.out);
    ctx.log << "rendered " << cams.size() << " views of " << grid_hash(grid) << "\n";
}

void cmd_evaluate(Context& ctx) {
    const RunConfig& r = ctx.run;
    const fs::path dir = require_path(r.paths.checkpoint, "checkpoint directory (--checkpoint)");
    const FeatureGrid reference = read_grid(require_path(r.paths.reference, "reference grid (--reference)"));
    const Checkpoint ckpt = load_checkpoint(dir);
    const PoseModel pose = pose_from_json(json::parse(ckpt.training_config_json).at("pose"));
    MetricsConfig mc = r.metrics;
    mc.master_seed = r.master_seed;
    const EvaluationReport report = evaluate_report(reference, ckpt.stack, pose, mc, checkpoint_hash(dir));
    const std::string text = report_to_json(report);
    write_text(ctx.out / "report.json", text);
    ctx.log << text;
}

class Overrides {
public:
    template <class T>
    void add(CLI::App* app, const std::string& name, const std::string& help, std::function<void(RunConfig&, const T&)> f) {
        auto value = std::make_shared<T>();
        CLI::Option* opt = app->add_option(name, *value, help);
        entries_.push_back({opt, [value, f](RunConfig& c) { f(c, *value); }});
    }

    void apply(RunConfig& c) const {
        for (const auto& [opt, f] : entries_)
            if (opt->count() > 0) f(c);
    }

private:
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> entries_;
};

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"remix3d: reconstruct a voxel scene from posed images and train a progressive 3D GAN on it"};
    app.require_subcommand(1);

    std::string config_path, out_dir, shape;
    std::vector<std::string> sets;
    uint64_t seed = 0;
    int until_stage = -1, frames = 16;

    auto common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_option("--seed", seed, "master seed");
        sub->add_option("--set", sets, "override a configuration key, e.g. recon.batches_per_level=2000");
    };

    CLI::App* make_scene = app.add_subcommand("make-scene", "synthesize a primitive scene and render posed views");
    CLI::App* recon = app.add_subcommand("reconstruct", "fit a feature grid to a posed image set");
    CLI::App* train = app.add_subcommand("train", "train the generator stage by stage (resumable)");
    CLI::App* sample = app.add_subcommand("sample", "generate a grid and render a turntable");
    CLI::App* retarget_cmd = app.add_subcommand("retarget", "sample with a scaled noise extent");
    CLI::App* render = app.add_subcommand("render", "render a grid file");
    CLI::App* evaluate = app.add_subcommand("evaluate", "compute visual quality and scene diversity");

    Overrides ov;
    for (CLI::App* s : {make_scene, recon, train, sample, retarget_cmd, render, evaluate}) common(s);

    ov.add<std::string>(make_scene, "--kind", "boxes | spheres | mixed", [](RunConfig& c, const std::string& v) { c.scene.kind = v; });
    ov.add<int>(make_scene, "--count", "number of primitives", [](RunConfig& c, const int& v) { c.scene.count = v; });
    ov.add<int>(make_scene, "--views", "number of views", [](RunConfig& c, const int& v) { c.scene.views = v; });
    ov.add<int>(make_scene, "--image-size", "image side in pixels", [](RunConfig& c, const int& v) { c.scene.image_size = v; });
    ov.add<int>(make_scene, "--resolution", "ground-truth grid resolution", [](RunConfig& c, const int& v) { c.scene.resolution = v; });

    ov.add<std::string>(recon, "--dataset", "manifest.json", [](RunConfig& c, const std::string& v) { c.paths.dataset = v; });
    ov.add<int>(recon, "--final-res", "final grid resolution", [](RunConfig& c, const int& v) { c.recon.final_resolution = {v, v, v}; });
    ov.add<int>(recon, "--divisor", "start divisor (power of two)", [](RunConfig& c, const int& v) { c.recon.start_divisor = v; });
    ov.add<int>(recon, "--batches", "batches per level", [](RunConfig& c, const int& v) { c.recon.batches_per_level = v; });
    ov.add<int>(recon, "--rays", "rays per batch", [](RunConfig& c, const int& v) { c.recon.rays_per_batch = v; });

    ov.add<std::string>(train, "--reference", "reference grid", [](RunConfig& c, const std::string& v) { c.paths.reference = v; });
    ov.add<std::string>(train, "--dataset", "manifest.json of the exemplar views", [](RunConfig& c, const std::string& v) { c.paths.dataset = v; });
    ov.add<int>(train, "--iterations", "iterations per stage", [](RunConfig& c, const int& v) { c.gan.iterations = v; });
    ov.add<int>(train, "--stages", "number of stages", [](RunConfig& c, const int& v) { c.gan.stages = v; });
    train->add_option("--until-stage", until_stage, "stop after training this stage");

    for (CLI::App* s : {sample, retarget_cmd}) {
        ov.add<std::string>(s, "--checkpoint", "checkpoint directory", [](RunConfig& c, const std::string& v) { c.paths.checkpoint = v; });
        s->add_option("--frames", frames, "turntable frames");
    }
    sample->add_option("--retarget", shape, "noise extent multiplier AxBxC");
    retarget_cmd->add_option("--shape", shape, "noise extent multiplier AxBxC")->required();

    ov.add<std::string>(render, "--grid", "RFG1 grid", [](RunConfig& c, const std::string& v) { c.paths.grid = v; });
    ov.add<std::string>(render, "--dataset", "manifest.json whose cameras to use", [](RunConfig& c, const std::string& v) { c.paths.dataset = v; });
    render->add_option("--frames", frames, "turntable frames when no dataset is given");

    ov.add<std::string>(evaluate, "--checkpoint", "checkpoint directory", [](RunConfig& c, const std::string& v) { c.paths.checkpoint = v; });
    ov.add<std::string>(evaluate, "--reference", "reference grid", [](RunConfig& c, const std::string& v) { c.paths.reference = v; });
    ov.add<int>(evaluate, "--views", "views for visual quality", [](RunConfig& c, const int& v) { c.metrics.n_views = v; });
    ov.add<int>(evaluate, "--seeds", "seeds for diversity", [](RunConfig& c, const int& v) { c.metrics.n_seeds = v; });

    std::vector<const char*> argv{"remix3d"};
    for (const std::string& a : args) argv.push_back(a.c_str());
    try {
        app.parse(int(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        json doc = config_path.empty() ? json::object() : read_json_file(config_path);
        for (const std::string& s : sets) apply_assignment(doc, s);
        Context ctx{RunConfig{}, fs::path(out_dir), out};
        overlay(ctx.run, doc);
        ov.apply(ctx.run);
        if (app.get_subcommands().front()->count("--seed") > 0) ctx.run.master_seed = seed;

        std::error_code ec;
        fs::create_directories(ctx.out, ec);
        if (ec) throw IoError("cannot create " + ctx.out.string());

        CLI::App* cmd = app.get_subcommands().front();
        if (cmd == make_scene) cmd_make_scene(ctx);
        else if (cmd == recon) cmd_reconstruct(ctx);
        else if (cmd == train) cmd_train(ctx, until_stage);
        else if (cmd == sample || cmd == retarget_cmd) cmd_sample(ctx, shape, frames);
        else if (cmd == render) cmd_render(ctx, frames);
        else if (cmd == evaluate) cmd_evaluate(ctx);
        write_text(ctx.out / "resolved-config.json", to_json(ctx.run).dump(2) + "\n");
        return kExitOk;
    } catch (const NumericalAbort& e) {
        err << "numerical abort: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const SchemaError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const PreconditionError& e) {
        err << "invalid input: " << e.what() << "\n";
        return kExitUsage;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}

int run_cli(int argc, const char* const* argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run_cli(args, std::cout, std::cerr);
}

} // namespace remix3d
