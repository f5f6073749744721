#pragma once

#include "cadfit/candidates.hpp"
#include "cadfit/config.hpp"
#include "cadfit/metrics.hpp"
#include "cadfit/prior.hpp"
#include "cadfit/program.hpp"

#include <tuple>
#include <vector>

namespace cadfit {

struct FitReport {
    std::vector<double> iou_trace; // one shared grid per report; non-decreasing
    int profile_count = 0;
    int kept_profile_count = 0;
    int candidate_count = 0;
    int pruned_ops = 0;
    int residual_iters = 0;
    double a = 0, b = 0, E = 0;
    double iou = 0;
    bool invalid = false;
    double wall_time_s = 0;
    std::vector<ProfileScore> profile_scores;
};

// Forward greedy selection under union composition: repeatedly add the
// candidate with the largest positive IoU gain on a shared voxel grid.
std::pair<Program, Solid> greedy_select(const std::vector<Candidate>& candidates,
                                        const Target& target, const FitConfig& cfg);

// Backward marginal pruning: repeatedly remove the op whose removal does not
// decrease IoU (largest gain first; ties go to the latest op).
Program backward_prune(const Program& program, const Target& target, const FitConfig& cfg);

// One single-pass reconstruction: extract profiles, filter with the prior,
// generate candidates, greedy select, prune.
std::tuple<Program, Solid, FitReport> reconstruct_once(const Target& target, const FitConfig& cfg);

// Corner-feature recovery on extrude profiles: probe fillet/chamfer, refine
// accepted features by golden-section line search on IoU.
Program recover_finishing(const Program& program, const Target& target, const FitConfig& cfg);

// Full pipeline: single pass, residual union/cut iterations, finishing
// features, final prune. The report's IoU trace is evaluated on one master
// grid and is non-decreasing by construction.
std::pair<Program, FitReport> iterative_fit(const TriMesh& mesh, const FitConfig& cfg);

}  // namespace cadfit
