#include "cadfit/runner.hpp"

#include "cadfit/config.hpp"

#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>

namespace cadfit {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::config_error: return 3;
        case ErrorKind::io_error:
        case ErrorKind::malformed_input:
        case ErrorKind::empty_mesh:
        case ErrorKind::not_watertight:
        case ErrorKind::degenerate_input: return 2;
        default: return 1;
    }
}

std::string error_json(const Error& e) {
    ordered_json j;
    j["error"] = error_kind_name(e.kind());
    j["message"] = e.what();
    return j.dump();
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io_error, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorKind::io_error, "write failed for " + path.string());
}

bool ends_with(const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(),
                                                  suffix) == 0;
}

std::vector<Vec3> transformed(const std::vector<Vec3>& pts, const Similarity& t) {
    std::vector<Vec3> out;
    out.reserve(pts.size());
    for (const auto& p : pts) out.push_back(t.apply(p));
    return out;
}

}  // namespace

std::string fit_report_to_json(const FitReport& r) {
    ordered_json j;
    j["iou"] = r.iou;
    j["a"] = r.a;
    j["b"] = r.b;
    j["E"] = r.E;
    j["invalid"] = r.invalid;
    j["iou_trace"] = r.iou_trace;
    j["profile_count"] = r.profile_count;
    j["kept_profile_count"] = r.kept_profile_count;
    j["candidate_count"] = r.candidate_count;
    j["pruned_ops"] = r.pruned_ops;
    j["residual_iters"] = r.residual_iters;
    ordered_json scores = ordered_json::array();
    for (const auto& s : r.profile_scores)
        scores.push_back(ordered_json::array({s.profile_id, s.p}));
    j["profile_scores"] = scores;
    return j.dump();
}

CommandResult cmd_reconstruct(const ReconstructOptions& opts) {
    auto t0 = std::chrono::steady_clock::now();
    try {
        FitConfig cfg = opts.config_path.empty() ? FitConfig{} : load_config(opts.config_path);
        if (opts.seed) cfg.seed = *opts.seed;
        if (opts.threads) cfg.threads = *opts.threads;

        TriMesh raw = load_mesh(opts.mesh_path);
        if (!is_watertight(raw))
            throw Error(ErrorKind::not_watertight, "input mesh is not watertight");
        NormalizeResult norm = normalize_mesh(raw);

        fs::create_directories(opts.out_dir);
        auto [program, report] = iterative_fit(norm.mesh, cfg);

        fs::path out(opts.out_dir);
        std::string program_json = serialize_program(program);
        write_text(out / "program.json", program_json);
        write_text(out / "program.py", emit_script(program));
        std::string report_json = fit_report_to_json(report);
        write_text(out / "report.json", report_json);
        bool wrote_stl = false;
        if (!program.ops.empty()) {
            try {
                TriMesh recon = tessellate_solid(Solid(program), std::max(96, cfg.iou_resolution));
                save_stl(recon, (out / "reconstruction.stl").string());
                wrote_stl = true;
            } catch (const Error&) {
                // empty or degenerate reconstruction; report stays authoritative
            }
        }

        ordered_json manifest;
        manifest["tool"] = kToolVersion;
        manifest["input"] = opts.mesh_path;
        manifest["seed"] = cfg.seed;
        manifest["config"] = ordered_json::parse(config_to_json(cfg));
        manifest["normalization"] = {{"scale", norm.scale},
                                     {"center", {norm.center.x(), norm.center.y(),
                                                 norm.center.z()}}};
        ordered_json outputs;
        outputs["program"] = (out / "program.json").string();
        outputs["script"] = (out / "program.py").string();
        outputs["report"] = (out / "report.json").string();
        if (wrote_stl) outputs["stl"] = (out / "reconstruction.stl").string();
        manifest["outputs"] = outputs;
        manifest["wall_time_s"] =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        write_text(out / "manifest.json", manifest.dump(2) + "\n");

        return {0, report_json};
    } catch (const Error& e) {
        return {exit_code_for(e), error_json(e)};
    } catch (const std::exception& e) {
        return {1, std::string("{\"error\":\"internal\",\"message\":") +
                       ordered_json(e.what()).dump() + "}"};
    }
}

CommandResult cmd_eval(const EvalOptions& opts) {
    try {
        TriMesh gt_raw = load_mesh(opts.gt_path);
        NormalizeResult gt_norm = normalize_mesh(gt_raw);
        const TriMesh& gt = gt_norm.mesh;

        // predicted surface: executed program or mesh file
        TriMesh pred;
        bool invalid = false;
        if (ends_with(opts.pred_path, ".json")) {
            try {
                std::ifstream in(opts.pred_path, std::ios::binary);
                if (!in) throw Error(ErrorKind::io_error, "cannot open " + opts.pred_path);
                std::string text((std::istreambuf_iterator<char>(in)),
                                 std::istreambuf_iterator<char>());
                Program program = deserialize_program(text);
                if (program.ops.empty()) throw Error(ErrorKind::empty_solid, "empty program");
                pred = tessellate_solid(Solid(program), 96);
            } catch (const Error&) {
                invalid = true;
            }
        } else {
            pred = load_mesh(opts.pred_path);
        }

        ordered_json j;
        if (invalid || pred.faces.empty()) {
            j["iou"] = 0.0;
            j["cd"] = nullptr; // infinity sentinel
            j["invalid"] = true;
            return {0, j.dump()};
        }

        constexpr uint64_t kEvalSeed = 7;
        constexpr size_t kCloud = 8192;
        std::vector<Vec3> pred_cloud = sample_surface(pred, kCloud, kEvalSeed);
        std::vector<Vec3> gt_cloud = sample_surface(gt, kCloud, kEvalSeed + 1);

        Similarity t; // identity when alignment is off
        if (opts.align) {
            AlignResult res = align_similarity(pred_cloud, gt_cloud);
            t = res.transform;
        }
        std::vector<Vec3> aligned_cloud = transformed(pred_cloud, t);
        double cd = chamfer_distance(aligned_cloud, gt_cloud, ChamferMode::symmetric);

        TriMesh pred_aligned = pred;
        for (auto& v : pred_aligned.vertices) v = t.apply(v);
        Box3 joint = gt.bounds();
        joint.expand(pred_aligned.bounds());
        MeshAccel gt_accel(gt);
        MeshAccel pred_accel(pred_aligned);
        Box3 gt_bounds = gt.bounds();
        Box3 pred_bounds = pred_aligned.bounds();
        VoxelGrid gt_grid = voxelize(
            [&](const Vec3& p) { return gt_bounds.contains(p) && gt_accel.contains(p); }, joint,
            64);
        VoxelGrid pred_grid = VoxelGrid::empty_like(gt_grid);
        fill_grid(pred_grid,
                  [&](const Vec3& p) { return pred_bounds.contains(p) && pred_accel.contains(p); });
        double iou = volumetric_iou(pred_grid, gt_grid);
        Residuals res = compute_residuals(gt_grid, pred_grid);

        j["iou"] = iou;
        j["cd"] = cd;
        j["invalid"] = false;
        ordered_json align;
        align["rotation"] = {t.rotation.x(), t.rotation.y(), t.rotation.z()};
        align["translation"] = {t.translation.x(), t.translation.y(), t.translation.z()};
        align["scale"] = t.scale;
        j["align"] = align;
        j["a"] = res.a;
        j["b"] = res.b;
        j["E"] = res.a + res.b;
        j["cd_samples"] = kCloud;
        return {0, j.dump()};
    } catch (const Error& e) {
        return {exit_code_for(e), error_json(e)};
    } catch (const std::exception& e) {
        return {1, std::string("{\"error\":\"internal\",\"message\":") +
                       ordered_json(e.what()).dump() + "}"};
    }
}

CommandResult cmd_generate(const GenerateOptions& opts) {
    try {
        if (opts.n < 1) throw Error(ErrorKind::config_error, "gen: n must be >= 1");
        fs::create_directories(opts.out_dir);
        ordered_json files = ordered_json::array();
        for (int i = 0; i < opts.n; ++i) {
            Rng rng(Rng::derive(opts.seed, uint64_t(i) + 1));
            Program program = generate_program(opts.complexity, rng);
            char name[64];
            std::snprintf(name, sizeof(name), "gen_%03d", i);
            fs::path base = fs::path(opts.out_dir) / name;
            write_text(base.string() + ".json", serialize_program(program));
            TriMesh mesh = tessellate_solid(Solid(program), 96);
            save_stl(mesh, base.string() + ".stl");
            ordered_json f;
            f["program"] = base.string() + ".json";
            f["stl"] = base.string() + ".stl";
            f["ops"] = program.ops.size();
            files.push_back(f);
        }
        ordered_json j;
        j["generated"] = opts.n;
        j["files"] = files;
        return {0, j.dump()};
    } catch (const Error& e) {
        return {exit_code_for(e), error_json(e)};
    } catch (const std::exception& e) {
        return {1, std::string("{\"error\":\"internal\",\"message\":") +
                       ordered_json(e.what()).dump() + "}"};
    }
}

}  // namespace cadfit
