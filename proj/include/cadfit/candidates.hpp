#pragma once

#include "cadfit/config.hpp"
#include "cadfit/metrics.hpp"
#include "cadfit/program.hpp"
#include "cadfit/sketch.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cadfit {

struct SweepConfig {
    int n_samples = 64;             // sweep grid points per side of h = 0
    double cd_threshold = 0.01;     // stability bound on the one-sided objective
    double slope_threshold = 0;     // 0 = derived as 10 * cd_threshold / step
    double translation_step = 0.01; // canonicalization granularity
    double h_min = -2.0, h_max = 2.0;
    int surface_samples = 2048;     // endpoint refinement and fit errors
    int coarse_samples = 512;       // stable-run detection pass
    uint64_t seed = 12345;
};

// Sweep bounds from the target extent, thresholds from the fit config.
SweepConfig sweep_config_for(const Target& target, const FitConfig& cfg);

struct Candidate {
    Operation op; // role defaults to union; assembly assigns the actual role
    double fit_error = 0;
    int profile_id = -1;
    double h_lo = 0, h_hi = 0; // stable interval, extrude candidates only
    std::string provenance;
};

struct SweepTable {
    std::vector<double> h;
    std::vector<double> d;
};

// The raw objective sweep D(h); exposed for inspection and the CSV dump.
SweepTable sweep_table(const Profile& profile, const Target& target, const SweepConfig& cfg);

// Stable-interval extrusion candidates: the interval containing h = 0 and the
// largest interval, canonicalized to positive heights.
std::vector<Candidate> sweep_extrude_heights(const Profile& profile, const Target& target,
                                             const SweepConfig& cfg);

// Reparameterizes a signed interval: plane shifted by h_minus, positive height.
std::pair<Plane, double> canonicalize_interval(const Profile& profile, const Plane& plane,
                                               double h_minus, double h_plus,
                                               double translation_step);

// Best full-revolution candidate over the principal-axis hypotheses, or
// nullopt when no axis satisfies the half-plane invariant within threshold.
// axis_context supplies the loop point distribution the axes are derived
// from; defaults to the profile's own outer loop.
std::optional<Candidate> fit_revolve(const Profile& profile, const Target& target,
                                     const SweepConfig& cfg,
                                     const std::vector<Vec2>* axis_context = nullptr);

// Simplification + sweeps + revolve fits over all profiles, sorted by
// (fit_error, provenance).
std::vector<Candidate> generate_candidates(const std::vector<Profile>& profiles,
                                           const Target& target, const FitConfig& cfg);

// Parametric-primitive simplification of a profile's loops; falls back to the
// original polygons when fitting fails.
Profile simplify_profile(const Profile& profile, double tol);

}  // namespace cadfit
