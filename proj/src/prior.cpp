#include "cadfit/prior.hpp"

#include <cmath>

namespace cadfit {

double score_profile(const Target& target, const Profile& profile, const FitConfig& cfg) {
    // proximity: fraction of outer vertices near the target surface
    double near = 0;
    double reach = 2.0 * cfg.slice_offset;
    if (!profile.outer.points.empty() && target.surface_index) {
        for (const auto& uv : profile.outer.points) {
            Vec3 p = profile.plane.to_world(uv);
            if (target.index().nearest_dist2(p) <= reach * reach) near += 1;
        }
        near /= double(profile.outer.points.size());
    }
    // normalized area relative to the target's dominant cross-section
    double side = std::max(target.bounds.longest_side(), 1e-9);
    double area_ref = 0.5 * side * side;
    double area = std::min(1.0, profile.area() / area_ref);
    // primitive compactness
    PrimitiveChain chain = fit_primitives(profile.outer, cfg.primitive_fit_tol);
    double compact = 1.0 / (1.0 + double(chain.elements.size()) / 8.0);
    // provenance bonus for axis/cluster planes
    double bonus = profile.source == PlaneSource::residual ? 0.0 : 1.0;
    double score = 0.5 * near + 0.2 * area + 0.2 * compact + 0.1 * bonus;
    return std::clamp(score, 0.0, 1.0);
}

std::vector<ProfileScore> score_profiles(const Target& target,
                                         const std::vector<Profile>& profiles,
                                         const FitConfig& cfg) {
    std::vector<ProfileScore> out;
    out.reserve(profiles.size());
    for (const auto& p : profiles) out.push_back({p.id, score_profile(target, p, cfg)});
    return out;
}

std::vector<Profile> filter_profiles(const std::vector<Profile>& profiles,
                                     const std::vector<ProfileScore>& scores, int budget,
                                     uint64_t seed) {
    if (budget < 1) throw Error(ErrorKind::domain_error, "filter_profiles: budget must be >= 1");
    size_t n = profiles.size();
    std::vector<double> p(n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (const auto& s : scores)
            if (s.profile_id == profiles[i].id) p[i] = std::clamp(s.p, 0.0, 1.0);
    }
    Rng rng(Rng::derive(seed, 0xf117e7));
    std::vector<size_t> kept;
    for (size_t i = 0; i < n; ++i)
        if (rng.uniform() < p[i]) kept.push_back(i);

    std::vector<size_t> by_score(n);
    for (size_t i = 0; i < n; ++i) by_score[i] = i;
    std::stable_sort(by_score.begin(), by_score.end(),
                     [&](size_t a, size_t b) { return p[a] > p[b]; });

    if (int(kept.size()) > budget) {
        // keep the top-budget survivors by score
        std::vector<char> surv(n, 0);
        for (size_t i : kept) surv[i] = 1;
        std::vector<size_t> trimmed;
        for (size_t i : by_score) {
            if (!surv[i]) continue;
            trimmed.push_back(i);
            if (int(trimmed.size()) == budget) break;
        }
        std::sort(trimmed.begin(), trimmed.end());
        kept = std::move(trimmed);
    }
    size_t floor_count = std::min<size_t>(8, n);
    if (kept.size() < floor_count) {
        std::vector<char> surv(n, 0);
        for (size_t i : kept) surv[i] = 1;
        for (size_t i : by_score) {
            if (kept.size() >= floor_count) break;
            if (surv[i]) continue;
            surv[i] = 1;
            kept.push_back(i);
        }
        std::sort(kept.begin(), kept.end());
    }
    std::vector<Profile> out;
    out.reserve(kept.size());
    for (size_t i : kept) out.push_back(profiles[i]);
    return out;
}

}  // namespace cadfit
