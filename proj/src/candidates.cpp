#include "cadfit/candidates.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace cadfit {

SweepConfig sweep_config_for(const Target& target, const FitConfig& cfg) {
    SweepConfig s;
    s.n_samples = cfg.sweep_samples;
    s.cd_threshold = cfg.cd_threshold;
    s.translation_step = cfg.translation_step;
    double diag = std::max(target.bounds.diagonal(), 1e-6);
    s.h_min = -diag;
    s.h_max = diag;
    s.surface_samples = cfg.candidate_surface_samples;
    s.seed = Rng::derive(cfg.seed, 0x5eedcafe);
    return s;
}

namespace {

double objective_n(const CandidateSampler& sampler, double h, const Target& target, size_t n,
                   uint64_t seed) {
    SurfaceSamples s = sampler.sample(h, n, seed);
    if (s.points.empty()) return std::numeric_limits<double>::infinity();
    return chamfer_to_index(s.points, target.index(), ChamferMode::one_sided);
}

double objective(const CandidateSampler& sampler, double h, const Target& target,
                 const SweepConfig& cfg) {
    return objective_n(sampler, h, target, size_t(cfg.surface_samples), cfg.seed);
}

SweepTable sweep_table_impl(const CandidateSampler& sampler, const Target& target,
                            const SweepConfig& cfg) {
    SweepTable t;
    int n = std::max(8, cfg.n_samples);
    for (int i = -n; i <= n; ++i) {
        double h = i < 0 ? cfg.h_min * double(-i) / n : cfg.h_max * double(i) / n;
        t.h.push_back(h);
    }
    t.d.resize(t.h.size());
    for (size_t i = 0; i < t.h.size(); ++i) t.d[i] = objective(sampler, t.h[i], target, cfg);
    return t;
}

}  // namespace

SweepTable sweep_table(const Profile& profile, const Target& target, const SweepConfig& cfg) {
    CandidateSampler sampler(profile, OpKind::extrude, RevolveAxis{});
    return sweep_table_impl(sampler, target, cfg);
}

std::pair<Plane, double> canonicalize_interval(const Profile& profile, const Plane& plane,
                                               double h_minus, double h_plus,
                                               double translation_step) {
    (void)profile;
    if (h_minus > 1e-12 || h_plus < -1e-12)
        throw Error(ErrorKind::domain_error, "canonicalize_interval: need h_minus <= 0 <= h_plus");
    auto snap = [&](double v) { return std::round(v / translation_step) * translation_step; };
    double lo = snap(h_minus), hi = snap(h_plus);
    double height = hi - lo;
    if (height <= 0.5 * translation_step)
        throw Error(ErrorKind::degenerate_input, "canonicalize_interval: zero-length interval");
    return {plane.translated(lo), height};
}

std::vector<Candidate> sweep_extrude_heights(const Profile& profile, const Target& target,
                                             const SweepConfig& cfg) {
    std::vector<Candidate> out;
    if (target.surface_points.empty()) return out;
    CandidateSampler sampler(profile, OpKind::extrude, RevolveAxis{});
    SweepConfig coarse_cfg = cfg;
    if (cfg.coarse_samples > 0)
        coarse_cfg.surface_samples = std::min(cfg.surface_samples, cfg.coarse_samples);
    SweepTable table = sweep_table_impl(sampler, target, coarse_cfg);
    const auto& H = table.h;
    const auto& D = table.d;
    int m = int(H.size());
    double eps = cfg.cd_threshold;
    double step = (cfg.h_max - cfg.h_min) / double(2 * std::max(8, cfg.n_samples));
    double slope_threshold =
        cfg.slope_threshold > 0 ? cfg.slope_threshold : 10.0 * eps / std::max(step, 1e-12);

    // boundary edges: sharp slope increase between consecutive samples
    std::vector<bool> boundary(std::max(0, m - 1), false);
    for (int i = 0; i + 1 < m; ++i) {
        double dh = H[i + 1] - H[i];
        if (dh <= 0) continue;
        if ((D[i + 1] - D[i]) / dh > slope_threshold) boundary[i] = true;
    }

    // maximal stable runs (D <= eps), not crossing boundary edges
    struct Run {
        int first, last;
    };
    std::vector<Run> runs;
    int i = 0;
    while (i < m) {
        if (!(D[i] <= eps)) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 < m && D[j + 1] <= eps && !boundary[j]) ++j;
        runs.push_back({i, j});
        i = j + 1;
    }
    // merge runs separated by at most one bad sample (and no boundary between)
    for (size_t r = 0; r + 1 < runs.size();) {
        bool cross_boundary = false;
        for (int k = runs[r].last; k < runs[r + 1].first; ++k)
            if (boundary[k]) cross_boundary = true;
        if (runs[r + 1].first - runs[r].last <= 2 && !cross_boundary) {
            runs[r].last = runs[r + 1].last;
            runs.erase(runs.begin() + r + 1);
        } else {
            ++r;
        }
    }
    if (runs.empty()) return out;

    int zero_idx = std::max(8, cfg.n_samples); // H[zero_idx] == 0
    int zero_run = -1, largest_run = -1;
    double largest_len = -1;
    for (int r = 0; r < int(runs.size()); ++r) {
        if (runs[r].first <= zero_idx && zero_idx <= runs[r].last) zero_run = r;
        double len = H[runs[r].last] - H[runs[r].first];
        double best_d = *std::min_element(D.begin() + runs[r].first, D.begin() + runs[r].last + 1);
        bool better = len > largest_len + 1e-12;
        if (!better && std::abs(len - largest_len) <= 1e-12 && largest_run >= 0) {
            double cur_best = *std::min_element(D.begin() + runs[largest_run].first,
                                                D.begin() + runs[largest_run].last + 1);
            better = best_d < cur_best;
        }
        if (better) {
            largest_len = len;
            largest_run = r;
        }
    }

    // local refinement of an endpoint at translation-step granularity; sign
    // keeps h_minus <= 0 and h_plus >= 0
    auto refine = [&](double coarse, int sign) {
        double best_h = coarse;
        double best_d = objective(sampler, coarse, target, cfg);
        double lo = coarse - step, hi = coarse + step;
        if (sign < 0) hi = std::min(hi, 0.0);
        if (sign > 0) lo = std::max(lo, 0.0);
        int64_t k0 = int64_t(std::ceil(lo / cfg.translation_step - 1e-9));
        int64_t k1 = int64_t(std::floor(hi / cfg.translation_step + 1e-9));
        for (int64_t k = k0; k <= k1; ++k) {
            double h = double(k) * cfg.translation_step;
            double d = objective(sampler, h, target, cfg);
            if (d < best_d - 1e-15 ||
                (std::abs(d - best_d) <= 1e-15 && std::abs(h) < std::abs(best_h))) {
                best_d = d;
                best_h = h;
            }
        }
        return std::pair<double, double>(best_h, best_d);
    };

    auto make_candidate = [&](const Run& run) -> std::optional<Candidate> {
        // per-side argmin over the run
        int lo_idx = -1, hi_idx = -1;
        for (int k = run.first; k <= run.last; ++k) {
            if (H[k] <= 1e-15 && (lo_idx < 0 || D[k] < D[lo_idx])) lo_idx = k;
            if (H[k] >= -1e-15 && (hi_idx < 0 || D[k] < D[hi_idx])) hi_idx = k;
        }
        double h_minus = 0, h_plus = 0, err = std::numeric_limits<double>::max();
        if (lo_idx >= 0) {
            auto [h, d] = refine(H[lo_idx], -1);
            h_minus = std::min(h, 0.0);
            err = std::min(err, d);
        }
        if (hi_idx >= 0) {
            auto [h, d] = refine(H[hi_idx], +1);
            h_plus = std::max(h, 0.0);
            err = std::min(err, d);
        }
        Candidate c;
        try {
            auto [plane, height] = canonicalize_interval(profile, profile.plane, h_minus, h_plus,
                                                         cfg.translation_step);
            c.op.kind = OpKind::extrude;
            c.op.role = BoolRole::boolean_union;
            c.op.profile = profile;
            c.op.profile.plane = plane;
            c.op.height = height;
        } catch (const Error&) {
            return std::nullopt; // degenerate interval
        }
        c.fit_error = err;
        c.profile_id = profile.id;
        c.h_lo = h_minus;
        c.h_hi = h_plus;
        std::ostringstream prov;
        prov << "profile " << profile.id << " extrude [" << h_minus << ", " << h_plus << "]";
        c.provenance = prov.str();
        return c;
    };

    std::set<int> picked;
    if (zero_run >= 0) picked.insert(zero_run);
    if (largest_run >= 0) picked.insert(largest_run);
    for (int r : picked)
        if (auto c = make_candidate(runs[r])) out.push_back(std::move(*c));
    return out;
}

// ---------------------------------------------------------------------------
// Revolve fitting
// ---------------------------------------------------------------------------

std::optional<Candidate> fit_revolve(const Profile& profile, const Target& target,
                                     const SweepConfig& cfg,
                                     const std::vector<Vec2>* axis_context) {
    if (target.surface_points.empty()) return std::nullopt;
    const std::vector<Vec2>& ctx = axis_context ? *axis_context : profile.outer.points;
    if (ctx.size() < 3) return std::nullopt;
    Vec2 centroid(0, 0);
    for (const auto& p : ctx) centroid += p;
    centroid /= double(ctx.size());
    double sxx = 0, syy = 0, sxy = 0;
    for (const auto& p : ctx) {
        Vec2 d = p - centroid;
        sxx += d.x() * d.x();
        syy += d.y() * d.y();
        sxy += d.x() * d.y();
    }
    double theta = 0.5 * std::atan2(2 * sxy, sxx - syy);
    Vec2 e1(std::cos(theta), std::sin(theta));
    Vec2 e2(-e1.y(), e1.x());
    auto rotated = [](const Vec2& v, double ang) {
        double c = std::cos(ang), s = std::sin(ang);
        return Vec2(c * v.x() - s * v.y(), s * v.x() + c * v.y());
    };
    std::vector<Vec2> dirs{e1, e2, rotated(e1, M_PI / 4), rotated(e1, -M_PI / 4),
                           rotated(e2, M_PI / 4), rotated(e2, -M_PI / 4)};
    // dedupe directions as lines
    std::vector<Vec2> unique_dirs;
    for (const auto& d : dirs) {
        bool dup = false;
        for (const auto& u : unique_dirs)
            if (std::abs(u.dot(d)) > std::cos(1.0 * M_PI / 180.0)) dup = true;
        if (!dup) unique_dirs.push_back(d);
    }

    std::optional<Candidate> best;
    for (const auto& dir : unique_dirs) {
        // half-plane gate on the outer loop
        double lo = 0, hi = 0;
        for (const auto& p : profile.outer.points) {
            double s = dir.x() * (p.y() - centroid.y()) - dir.y() * (p.x() - centroid.x());
            lo = std::min(lo, s);
            hi = std::max(hi, s);
        }
        if (lo < -1e-6 && hi > 1e-6) continue;
        RevolveAxis axis{centroid, dir};
        SurfaceSamples s = sample_candidate_surface(profile, OpKind::revolve, 0, axis,
                                                    cfg.surface_samples, cfg.seed);
        if (s.points.empty()) continue;
        double d = chamfer_to_index(s.points, target.index(), ChamferMode::one_sided);
        if (d > cfg.cd_threshold) continue;
        if (!best || d < best->fit_error) {
            Candidate c;
            c.op.kind = OpKind::revolve;
            c.op.role = BoolRole::boolean_union;
            c.op.profile = profile;
            c.op.axis = axis;
            c.fit_error = d;
            c.profile_id = profile.id;
            std::ostringstream prov;
            prov << "profile " << profile.id << " revolve axis (" << dir.x() << ", " << dir.y()
                 << ")";
            c.provenance = prov.str();
            best = std::move(c);
        }
    }
    return best;
}

namespace {

Vec2 element_start(const PrimitiveElement& el) {
    if (auto* s = std::get_if<LineSegment>(&el)) return s->p0;
    if (auto* a = std::get_if<Arc>(&el)) return a->point_at(0.0);
    if (auto* p = std::get_if<Polyline>(&el)) return p->points.front();
    return std::get<Circle>(el).center;
}

Vec2 element_end(const PrimitiveElement& el) {
    if (auto* s = std::get_if<LineSegment>(&el)) return s->p1;
    if (auto* a = std::get_if<Arc>(&el)) return a->point_at(1.0);
    if (auto* p = std::get_if<Polyline>(&el)) return p->points.back();
    return std::get<Circle>(el).center;
}

// Chain rendering with exact corners: junctions between two line segments are
// replaced by the intersection of the fitted lines (loop samples round real
// corners off, the line intersection restores them).
Polygon2 chain_polygon_sharp(const PrimitiveChain& chain, int arc_points) {
    size_t n = chain.elements.size();
    if (n == 0) return {};
    if (n == 1 && std::holds_alternative<Circle>(chain.elements[0]))
        return chain.to_polygon(arc_points);
    std::vector<Vec2> junction(n); // junction[i] joins element i-1 and element i
    for (size_t i = 0; i < n; ++i) {
        const auto& prev = chain.elements[(i + n - 1) % n];
        const auto& cur = chain.elements[i];
        Vec2 shared = 0.5 * (element_end(prev) + element_start(cur));
        junction[i] = shared;
        auto* s0 = std::get_if<LineSegment>(&prev);
        auto* s1 = std::get_if<LineSegment>(&cur);
        if (s0 && s1) {
            Vec2 d0 = s0->p1 - s0->p0, d1 = s1->p1 - s1->p0;
            double det = d0.x() * d1.y() - d0.y() * d1.x();
            double scale = d0.norm() * d1.norm();
            if (std::abs(det) > 1e-9 * scale) {
                Vec2 rhs = s1->p0 - s0->p0;
                double t = (rhs.x() * d1.y() - rhs.y() * d1.x()) / det;
                Vec2 hit = s0->p0 + t * d0;
                double reach = 0.5 * std::min(d0.norm(), d1.norm());
                if ((hit - shared).norm() <= reach) junction[i] = hit;
            }
        }
    }
    Polygon2 poly;
    for (size_t i = 0; i < n; ++i) {
        poly.push_back(junction[i]);
        const auto& el = chain.elements[i];
        if (auto* a = std::get_if<Arc>(&el)) {
            for (int k = 1; k < arc_points; ++k)
                poly.push_back(a->point_at(double(k) / arc_points));
        } else if (auto* p = std::get_if<Polyline>(&el)) {
            for (size_t k = 1; k + 1 < p->points.size(); ++k) poly.push_back(p->points[k]);
        }
    }
    return poly;
}

}  // namespace

Profile simplify_profile(const Profile& profile, double tol) {
    Profile out = profile;
    auto simplify_loop = [&](const Loop2D& loop) -> Loop2D {
        PrimitiveChain chain = fit_primitives(loop, tol);
        Polygon2 poly = chain_polygon_sharp(chain, 24);
        if (poly.size() < 3) return loop;
        Loop2D s{std::move(poly)};
        double orig = loop.signed_area();
        if ((s.signed_area() > 0) != (orig > 0))
            std::reverse(s.points.begin(), s.points.end());
        // accept only if the polygons stay within the fit tolerance of each
        // other (both directions)
        double bound = 2.0 * tol * std::max(loop.diameter(), 1e-12);
        for (const auto& p : loop.points)
            if (distance_to_boundary(s.points, p) > bound) return loop;
        for (const auto& p : s.points)
            if (distance_to_boundary(loop.points, p) > bound) return loop;
        return s;
    };
    out.outer = simplify_loop(profile.outer);
    for (auto& h : out.holes) h = simplify_loop(h);
    return out;
}

std::vector<Candidate> generate_candidates(const std::vector<Profile>& profiles,
                                           const Target& target, const FitConfig& cfg) {
    SweepConfig sweep = sweep_config_for(target, cfg);
    // group loop points per plane for revolve axis hypotheses
    auto plane_key = [](const Plane& p) {
        auto r = [](double v) { return std::llround(v * 1e6); };
        return std::tuple<int64_t, int64_t, int64_t, int64_t>(
            r(p.normal.x()), r(p.normal.y()), r(p.normal.z()), r(p.origin.dot(p.normal)));
    };
    std::map<std::tuple<int64_t, int64_t, int64_t, int64_t>, std::vector<Vec2>> plane_points;
    std::vector<Profile> simplified;
    simplified.reserve(profiles.size());
    for (const auto& prof : profiles) {
        Profile s = simplify_profile(prof, cfg.primitive_fit_tol);
        auto& ctx = plane_points[plane_key(s.plane)];
        ctx.insert(ctx.end(), s.outer.points.begin(), s.outer.points.end());
        for (const auto& h : s.holes) ctx.insert(ctx.end(), h.points.begin(), h.points.end());
        simplified.push_back(std::move(s));
    }

    std::vector<Candidate> all;
    for (const auto& prof : simplified) {
        auto ext = sweep_extrude_heights(prof, target, sweep);
        all.insert(all.end(), ext.begin(), ext.end());
        const auto& ctx = plane_points[plane_key(prof.plane)];
        if (auto rev = fit_revolve(prof, target, sweep, &ctx)) all.push_back(std::move(*rev));
    }
    std::stable_sort(all.begin(), all.end(), [](const Candidate& a, const Candidate& b) {
        if (a.fit_error != b.fit_error) return a.fit_error < b.fit_error;
        return a.provenance < b.provenance;
    });
    return all;
}

}  // namespace cadfit
