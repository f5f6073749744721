#pragma once

#include "cadfit/config.hpp"
#include "cadfit/metrics.hpp"
#include "cadfit/sketch.hpp"

#include <vector>

namespace cadfit {

struct ProfileScore {
    int profile_id;
    double p; // in [0, 1]
};

// Heuristic mesh-sketch compatibility score in [0,1]. Stands in for a learned
// scorer behind the same contract: higher means the profile is more likely to
// appear in the final program.
double score_profile(const Target& target, const Profile& profile, const FitConfig& cfg);

std::vector<ProfileScore> score_profiles(const Target& target,
                                         const std::vector<Profile>& profiles,
                                         const FitConfig& cfg);

// Stochastic budgeted filter: keep each profile with probability p, cap at
// `budget` by score, backfill to min(8, n) by score rank. Deterministic per
// seed.
std::vector<Profile> filter_profiles(const std::vector<Profile>& profiles,
                                     const std::vector<ProfileScore>& scores, int budget,
                                     uint64_t seed);

}  // namespace cadfit
