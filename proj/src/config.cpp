#include "cadfit/config.hpp"

#include "cadfit/types.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace cadfit {

using ordered_json = nlohmann::ordered_json;

const char* sketch_source_name(SketchSource s) {
    switch (s) {
        case SketchSource::axis: return "axis";
        case SketchSource::planar: return "planar";
        case SketchSource::both: return "both";
    }
    return "both";
}

SketchSource sketch_source_from_name(const std::string& name) {
    if (name == "axis") return SketchSource::axis;
    if (name == "planar") return SketchSource::planar;
    if (name == "both") return SketchSource::both;
    throw Error(ErrorKind::config_error,
                "sketch_source: expected \"axis\", \"planar\" or \"both\", got \"" + name + "\"");
}

FitConfig parse_config(const std::string& text) {
    ordered_json j;
    try {
        j = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw Error(ErrorKind::config_error, std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw Error(ErrorKind::config_error, "config must be a JSON object");
    FitConfig cfg;
    auto num = [&](const char* key, double lo, double hi, double& out) {
        if (!j.contains(key)) return;
        if (!j[key].is_number())
            throw Error(ErrorKind::config_error, std::string(key) + ": expected a number");
        double v = j[key].get<double>();
        if (v < lo || v > hi)
            throw Error(ErrorKind::config_error, std::string(key) + ": out of range");
        out = v;
    };
    auto integer = [&](const char* key, int lo, int hi, int& out) {
        if (!j.contains(key)) return;
        if (!j[key].is_number_integer())
            throw Error(ErrorKind::config_error, std::string(key) + ": expected an integer");
        int v = j[key].get<int>();
        if (v < lo || v > hi)
            throw Error(ErrorKind::config_error, std::string(key) + ": out of range");
        out = v;
    };
    num("cd_threshold", 1e-9, 1.0, cfg.cd_threshold);
    num("slice_offset", 1e-6, 0.5, cfg.slice_offset);
    integer("n_slices", 1, 64, cfg.n_slices);
    num("residual_threshold", 1e-9, 1.0, cfg.residual_threshold);
    num("translation_step", 1e-6, 1.0, cfg.translation_step);
    if (j.contains("sketch_source")) {
        if (!j["sketch_source"].is_string())
            throw Error(ErrorKind::config_error, "sketch_source: expected a string");
        cfg.sketch_source = sketch_source_from_name(j["sketch_source"].get<std::string>());
    }
    integer("max_residual_iters", 0, 64, cfg.max_residual_iters);
    integer("iou_resolution", 16, 512, cfg.iou_resolution);
    integer("prior_budget", 1, 100000, cfg.prior_budget);
    if (j.contains("seed")) {
        if (!j["seed"].is_number_integer())
            throw Error(ErrorKind::config_error, "seed: expected an integer");
        cfg.seed = j["seed"].get<uint64_t>();
    }
    num("cluster_angle_deg", 0.1, 90.0, cfg.cluster_angle_deg);
    num("min_cluster_area_frac", 0.0, 1.0, cfg.min_cluster_area_frac);
    integer("loop_resample_n", 16, 4096, cfg.loop_resample_n);
    num("min_loop_area", 0.0, 10.0, cfg.min_loop_area);
    num("min_loop_length", 0.0, 10.0, cfg.min_loop_length);
    num("primitive_fit_tol", 1e-6, 1.0, cfg.primitive_fit_tol);
    integer("sweep_samples", 8, 4096, cfg.sweep_samples);
    integer("candidate_surface_samples", 64, 1000000, cfg.candidate_surface_samples);
    integer("target_surface_samples", 64, 10000000, cfg.target_surface_samples);
    integer("threads", 0, 4096, cfg.threads);

    static const char* known[] = {
        "cd_threshold", "slice_offset", "n_slices", "residual_threshold", "translation_step",
        "sketch_source", "max_residual_iters", "iou_resolution", "prior_budget", "seed",
        "cluster_angle_deg", "min_cluster_area_frac", "loop_resample_n", "min_loop_area",
        "min_loop_length", "primitive_fit_tol", "sweep_samples", "candidate_surface_samples",
        "target_surface_samples", "threads"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known)
            if (it.key() == k) ok = true;
        if (!ok) throw Error(ErrorKind::config_error, "unknown config key: " + it.key());
    }
    return cfg;
}

FitConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::config_error, "cannot open config " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_to_json(const FitConfig& cfg) {
    ordered_json j;
    j["cd_threshold"] = cfg.cd_threshold;
    j["slice_offset"] = cfg.slice_offset;
    j["n_slices"] = cfg.n_slices;
    j["residual_threshold"] = cfg.residual_threshold;
    j["translation_step"] = cfg.translation_step;
    j["sketch_source"] = sketch_source_name(cfg.sketch_source);
    j["max_residual_iters"] = cfg.max_residual_iters;
    j["iou_resolution"] = cfg.iou_resolution;
    j["prior_budget"] = cfg.prior_budget;
    j["seed"] = cfg.seed;
    j["cluster_angle_deg"] = cfg.cluster_angle_deg;
    j["min_cluster_area_frac"] = cfg.min_cluster_area_frac;
    j["loop_resample_n"] = cfg.loop_resample_n;
    j["min_loop_area"] = cfg.min_loop_area;
    j["min_loop_length"] = cfg.min_loop_length;
    j["primitive_fit_tol"] = cfg.primitive_fit_tol;
    j["sweep_samples"] = cfg.sweep_samples;
    j["candidate_surface_samples"] = cfg.candidate_surface_samples;
    j["target_surface_samples"] = cfg.target_surface_samples;
    j["threads"] = cfg.threads;
    return j.dump();
}

}  // namespace cadfit
