#pragma once

#include <cstdint>
#include <string>

namespace cadfit {

enum class SketchSource { axis, planar, both };

// Pipeline configuration. Defaults follow the base configuration used for all
// reported results; every field can be overridden from a JSON config file.
struct FitConfig {
    double cd_threshold = 0.01;       // epsilon for stable-interval detection
    double slice_offset = 0.05;       // delta: cluster-plane slice offset
    int n_slices = 5;                 // axis-aligned slicing planes per axis
    double residual_threshold = 0.02; // normalized residual volume stop test
    double translation_step = 0.01;   // height/offset snap granularity
    SketchSource sketch_source = SketchSource::both;
    int max_residual_iters = 3;
    int iou_resolution = 64;
    int prior_budget = 100;
    uint64_t seed = 0;

    // sketch extraction
    double cluster_angle_deg = 5.0;      // normal clustering tolerance
    double min_cluster_area_frac = 0.01; // of total surface area
    int loop_resample_n = 128;
    double min_loop_area = 1e-4;
    double min_loop_length = 1e-2;
    double primitive_fit_tol = 0.01; // RMS bound, relative to loop diameter

    // candidate generation
    int sweep_samples = 64; // per sweep side
    int candidate_surface_samples = 2048;
    int target_surface_samples = 8192;

    int threads = 0; // 0 = all cores
};

const char* sketch_source_name(SketchSource s);
SketchSource sketch_source_from_name(const std::string& name);

// Parse a JSON config file; missing fields keep defaults, unknown keys are
// rejected. Throws Error(config_error).
FitConfig load_config(const std::string& path);
FitConfig parse_config(const std::string& json_text);
std::string config_to_json(const FitConfig& cfg);

}  // namespace cadfit
