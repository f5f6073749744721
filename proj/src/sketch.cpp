#include "cadfit/sketch.hpp"

#include "cadfit/metrics.hpp"

#include <cmath>

namespace cadfit {

double Profile::area() const {
    double a = std::abs(outer.signed_area());
    for (const auto& h : holes) a -= std::abs(h.signed_area());
    return std::max(0.0, a);
}

bool Profile::contains(const Vec2& p) const {
    std::vector<Polygon2> hole_polys;
    hole_polys.reserve(holes.size());
    for (const auto& h : holes) hole_polys.push_back(h.points);
    return point_in_region(outer.points, hole_polys, p);
}

std::vector<Loop2D> extract_loops(const std::vector<Loop3D>& sections, const Plane& plane,
                                  const FitConfig& cfg) {
    std::vector<Loop2D> out;
    for (const auto& sec : sections) {
        Loop2D loop;
        loop.points.reserve(sec.points.size());
        for (const auto& p : sec.points) loop.points.push_back(plane.to_plane(p));
        Polygon2 res = resample_closed(loop.points, cfg.loop_resample_n);
        if (res.empty()) continue;
        Loop2D resampled{std::move(res)};
        if (std::abs(resampled.signed_area()) <= cfg.min_loop_area) continue;
        if (resampled.perimeter() <= cfg.min_loop_length) continue;
        out.push_back(std::move(resampled));
    }
    return out;
}

std::vector<Profile> group_profiles(const std::vector<Loop2D>& loops, const Plane& plane) {
    size_t n = loops.size();
    // depth[i] = number of loops strictly containing loop i (majority vertex vote)
    std::vector<int> depth(n, 0);
    std::vector<int> parent(n, -1); // smallest-area container
    std::vector<double> areas(n);
    for (size_t i = 0; i < n; ++i) areas[i] = std::abs(loops[i].signed_area());
    for (size_t i = 0; i < n; ++i) {
        double parent_area = std::numeric_limits<double>::max();
        for (size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            size_t votes = 0;
            for (const auto& p : loops[i].points)
                if (point_in_polygon(loops[j].points, p)) ++votes;
            if (votes * 2 > loops[i].points.size()) {
                ++depth[i];
                if (areas[j] < parent_area) {
                    parent_area = areas[j];
                    parent[i] = int(j);
                }
            }
        }
    }
    std::vector<Profile> profiles;
    std::vector<int> profile_of(n, -1);
    for (size_t i = 0; i < n; ++i) {
        if (depth[i] % 2 != 0) continue;
        Profile prof;
        prof.plane = plane;
        prof.outer = loops[i];
        if (prof.outer.signed_area() < 0)
            std::reverse(prof.outer.points.begin(), prof.outer.points.end());
        profile_of[i] = int(profiles.size());
        profiles.push_back(std::move(prof));
    }
    for (size_t i = 0; i < n; ++i) {
        if (depth[i] % 2 == 0 || parent[i] < 0) continue;
        int owner = profile_of[parent[i]];
        if (owner < 0) continue;
        Loop2D hole = loops[i];
        if (hole.signed_area() > 0) std::reverse(hole.points.begin(), hole.points.end());
        profiles[owner].holes.push_back(std::move(hole));
    }
    return profiles;
}

// ---------------------------------------------------------------------------
// Primitive fitting
// ---------------------------------------------------------------------------

LineFit fit_line(const Vec2* pts, size_t n) {
    Vec2 mean(0, 0);
    for (size_t i = 0; i < n; ++i) mean += pts[i];
    mean /= double(n);
    double sxx = 0, syy = 0, sxy = 0;
    for (size_t i = 0; i < n; ++i) {
        Vec2 d = pts[i] - mean;
        sxx += d.x() * d.x();
        syy += d.y() * d.y();
        sxy += d.x() * d.y();
    }
    // principal direction of the 2x2 covariance
    double theta = 0.5 * std::atan2(2 * sxy, sxx - syy);
    Vec2 dir(std::cos(theta), std::sin(theta));
    double ss = 0;
    for (size_t i = 0; i < n; ++i) {
        Vec2 d = pts[i] - mean;
        double off = d.x() * dir.y() - d.y() * dir.x();
        ss += off * off;
    }
    return {mean, dir, std::sqrt(ss / double(n))};
}

std::optional<CircleFit> fit_circle(const Vec2* pts, size_t n) {
    if (n < 3) return std::nullopt;
    // Kasa fit: minimize sum (x^2+y^2 + D x + E y + F)^2
    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0, sxz = 0, syz = 0, sz = 0;
    for (size_t i = 0; i < n; ++i) {
        double x = pts[i].x(), y = pts[i].y(), z = x * x + y * y;
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
        sxz += x * z;
        syz += y * z;
        sz += z;
    }
    Eigen::Matrix3d A;
    A << sxx, sxy, sx, sxy, syy, sy, sx, sy, double(n);
    Eigen::Vector3d rhs(sxz, syz, sz);
    Eigen::Matrix3d Ainv;
    bool invertible = false;
    double det = 0;
    A.computeInverseAndDetWithCheck(Ainv, det, invertible, 1e-12 * std::abs(sxx + syy + n));
    if (!invertible) return std::nullopt;
    Eigen::Vector3d sol = Ainv * rhs; // (D, E, F) with x^2+y^2 = D x + E y + F
    Vec2 center(0.5 * sol[0], 0.5 * sol[1]);
    double r2 = sol[2] + center.squaredNorm();
    if (r2 <= 0) return std::nullopt;
    double radius = std::sqrt(r2);
    double ss = 0;
    for (size_t i = 0; i < n; ++i) {
        double d = (pts[i] - center).norm() - radius;
        ss += d * d;
    }
    return CircleFit{center, radius, std::sqrt(ss / double(n))};
}

double Arc::sweep() const {
    double s = ccw ? end_angle - start_angle : start_angle - end_angle;
    while (s < 0) s += 2 * M_PI;
    while (s > 2 * M_PI) s -= 2 * M_PI;
    return s;
}

Vec2 Arc::point_at(double t) const {
    double ang = ccw ? start_angle + t * sweep() : start_angle - t * sweep();
    return center + radius * Vec2(std::cos(ang), std::sin(ang));
}

Polygon2 PrimitiveChain::to_polygon(int arc_points) const {
    Polygon2 poly;
    for (const auto& el : elements) {
        if (std::holds_alternative<LineSegment>(el)) {
            poly.push_back(std::get<LineSegment>(el).p0);
        } else if (std::holds_alternative<Arc>(el)) {
            const Arc& arc = std::get<Arc>(el);
            for (int i = 0; i < arc_points; ++i)
                poly.push_back(arc.point_at(double(i) / arc_points));
        } else if (std::holds_alternative<Circle>(el)) {
            const Circle& c = std::get<Circle>(el);
            int n = std::max(arc_points * 4, 32);
            for (int i = 0; i < n; ++i) {
                double a = 2 * M_PI * i / n;
                poly.push_back(c.center + c.radius * Vec2(std::cos(a), std::sin(a)));
            }
        } else {
            const Polyline& pl = std::get<Polyline>(el);
            for (size_t i = 0; i + 1 < pl.points.size(); ++i) poly.push_back(pl.points[i]);
            if (elements.size() == 1 && !pl.points.empty()) poly.push_back(pl.points.back());
        }
    }
    return poly;
}

namespace {

struct WindowFit {
    enum class Kind { line, arc } kind;
    LineFit line;
    CircleFit circle;
    double rms;
};

// Checks the arc derived from a circle fit actually tracks the window points
// in order; returns the Arc on success.
std::optional<Arc> arc_from_window(const CircleFit& fit, const Vec2* pts, size_t n) {
    Vec2 c = fit.center;
    double a0 = std::atan2(pts[0].y() - c.y(), pts[0].x() - c.x());
    double a1 = std::atan2(pts[n - 1].y() - c.y(), pts[n - 1].x() - c.x());
    // orientation from the midpoint
    const Vec2& mid = pts[n / 2];
    double am = std::atan2(mid.y() - c.y(), mid.x() - c.x());
    auto ccw_sweep = [](double from, double to) {
        double s = to - from;
        while (s < 0) s += 2 * M_PI;
        return s;
    };
    bool ccw = ccw_sweep(a0, am) <= ccw_sweep(a0, a1);
    Arc arc{c, fit.radius, a0, a1, ccw};
    if (arc.sweep() < 1e-6 || arc.sweep() > 2 * M_PI - 1e-6) return std::nullopt;
    // the points must advance monotonically along the sweep
    double prev = -1e-9;
    for (size_t i = 0; i < n; ++i) {
        double ai = std::atan2(pts[i].y() - c.y(), pts[i].x() - c.x());
        double t = (ccw ? ccw_sweep(a0, ai) : ccw_sweep(ai, a0)) / arc.sweep();
        if (t < prev - 1e-6 || t > 1 + 1e-6) return std::nullopt;
        prev = t;
    }
    return arc;
}

}  // namespace

PrimitiveChain fit_primitives(const Loop2D& loop, double tol) {
    PrimitiveChain chain;
    const Polygon2& pts = loop.points;
    size_t n = pts.size();
    if (n < 3) return chain;
    double diameter = loop.diameter();
    double rms_bound = tol * diameter;

    // whole-loop circle first
    if (auto fit = fit_circle(pts.data(), n); fit && fit->rms <= rms_bound) {
        double max_dev = 0;
        for (size_t i = 0; i < n; ++i) {
            max_dev = std::max(max_dev, std::abs((pts[i] - fit->center).norm() - fit->radius));
            Vec2 mid = 0.5 * (pts[i] + pts[(i + 1) % n]);
            max_dev = std::max(max_dev, std::abs((mid - fit->center).norm() - fit->radius));
        }
        if (max_dev <= rms_bound) {
            chain.elements.push_back(Circle{fit->center, fit->radius});
            return chain;
        }
    }

    // rotate so the loop starts at the sharpest corner
    size_t start = 0;
    double best_turn = -1;
    for (size_t i = 0; i < n; ++i) {
        Vec2 a = pts[(i + n - 1) % n], b = pts[i], c = pts[(i + 1) % n];
        Vec2 d0 = (b - a).normalized(), d1 = (c - b).normalized();
        double turn = 1 - d0.dot(d1);
        if (turn > best_turn) {
            best_turn = turn;
            start = i;
        }
    }
    Polygon2 rot(n);
    for (size_t i = 0; i < n; ++i) rot[i] = pts[(start + i) % n];
    rot.push_back(rot[0]); // closed run of n+1 points

    auto window_fit = [&](size_t begin, size_t count) -> std::optional<WindowFit> {
        const Vec2* w = rot.data() + begin;
        LineFit lf = fit_line(w, count);
        auto cf = fit_circle(w, count);
        // gate on max pointwise deviation so long windows cannot swallow
        // corners behind a diluted RMS
        double line_max = 0;
        for (size_t i = 0; i < count; ++i) {
            Vec2 d = w[i] - lf.point;
            line_max = std::max(line_max, std::abs(d.x() * lf.dir.y() - d.y() * lf.dir.x()));
        }
        double arc_max = std::numeric_limits<double>::max();
        if (cf) {
            arc_max = 0;
            for (size_t i = 0; i < count; ++i)
                arc_max = std::max(arc_max, std::abs((w[i] - cf->center).norm() - cf->radius));
            // segment midpoints must also track the circle: corner points of a
            // polygon are concyclic even when the shape is not an arc
            for (size_t i = 0; i + 1 < count; ++i) {
                Vec2 mid = 0.5 * (w[i] + w[i + 1]);
                arc_max = std::max(arc_max, std::abs((mid - cf->center).norm() - cf->radius));
            }
        }
        bool line_ok = line_max <= rms_bound;
        bool arc_ok = cf && arc_max <= rms_bound && cf->radius < 100 * diameter &&
                      arc_from_window(*cf, w, count).has_value();
        if (!line_ok && !arc_ok) return std::nullopt;
        WindowFit out;
        if (line_ok && (!arc_ok || line_max <= arc_max * 1.5)) {
            out.kind = WindowFit::Kind::line;
            out.line = lf;
            out.rms = lf.rms;
        } else {
            out.kind = WindowFit::Kind::arc;
            out.circle = *cf;
            out.rms = cf->rms;
        }
        return out;
    };

    size_t pos = 0;
    while (pos + 1 < rot.size()) {
        size_t remaining = rot.size() - pos;
        size_t count = std::min<size_t>(3, remaining);
        auto best = window_fit(pos, count);
        size_t best_count = count;
        while (pos + best_count < rot.size()) {
            size_t next = std::min(best_count + std::max<size_t>(1, best_count / 4), remaining);
            if (next == best_count) break;
            auto trial = window_fit(pos, next);
            if (!trial) {
                // binary refine between best_count and next
                size_t lo = best_count, hi = next;
                while (lo + 1 < hi) {
                    size_t mid = (lo + hi) / 2;
                    if (auto t2 = window_fit(pos, mid)) {
                        best = t2;
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                best_count = lo;
                break;
            }
            best = trial;
            best_count = next;
        }
        const Vec2& a = rot[pos];
        const Vec2& b = rot[pos + best_count - 1];
        if (!best) {
            // polyline fallback over the minimal window
            Polyline pl;
            for (size_t i = 0; i < best_count; ++i) pl.points.push_back(rot[pos + i]);
            chain.elements.push_back(pl);
        } else if (best->kind == WindowFit::Kind::line) {
            chain.elements.push_back(LineSegment{a, b});
        } else {
            auto arc = arc_from_window(best->circle, rot.data() + pos, best_count);
            if (arc)
                chain.elements.push_back(*arc);
            else
                chain.elements.push_back(LineSegment{a, b});
        }
        pos += best_count - 1;
    }

    // merge adjacent colinear line segments (including across the seam)
    auto merge_pass = [&]() {
        bool changed = false;
        for (size_t i = 0; i < chain.elements.size() && chain.elements.size() > 1;) {
            size_t j = (i + 1) % chain.elements.size();
            auto* s0 = std::get_if<LineSegment>(&chain.elements[i]);
            auto* s1 = std::get_if<LineSegment>(&chain.elements[j]);
            if (s0 && s1 && (s0->p1 - s1->p0).norm() < 1e-9) {
                Vec2 d0 = (s0->p1 - s0->p0).normalized();
                Vec2 d1 = (s1->p1 - s1->p0).normalized();
                if (d0.dot(d1) > std::cos(1.0 * M_PI / 180.0)) {
                    s0->p1 = s1->p1;
                    chain.elements.erase(chain.elements.begin() + j);
                    changed = true;
                    continue;
                }
            }
            ++i;
        }
        return changed;
    };
    while (merge_pass()) {
    }
    return chain;
}

// ---------------------------------------------------------------------------
// Candidate extraction
// ---------------------------------------------------------------------------

namespace {

// Axis-slice loops that reproduce the target's own bounding-box cross-section
// are suppressed: they describe the bounds, not a feature.
bool is_bbox_rectangle(const Loop2D& loop, const Plane& plane, const Box3& bounds, double tol) {
    const Polygon2& pts = loop.points;
    PrimitiveChain chain = fit_primitives(loop, 5e-3);
    if (chain.elements.size() != 4) return false;
    std::array<Vec2, 4> dirs;
    for (int i = 0; i < 4; ++i) {
        auto* seg = std::get_if<LineSegment>(&chain.elements[i]);
        if (!seg) return false;
        dirs[i] = (seg->p1 - seg->p0).normalized();
    }
    for (int i = 0; i < 4; ++i) {
        double dot = std::abs(dirs[i].dot(dirs[(i + 1) % 4]));
        if (dot > std::sin(2.0 * M_PI / 180.0)) return false; // needs 90 deg within 2
    }
    // compare the loop bbox against the target bounds cross-section
    Box2 lb = polygon_bounds(pts);
    Box2 sb;
    for (int cx = 0; cx < 2; ++cx)
        for (int cy = 0; cy < 2; ++cy)
            for (int cz = 0; cz < 2; ++cz) {
                Vec3 corner(cx ? bounds.hi.x() : bounds.lo.x(), cy ? bounds.hi.y() : bounds.lo.y(),
                            cz ? bounds.hi.z() : bounds.lo.z());
                sb.expand(plane.to_plane(corner));
            }
    return (lb.lo - sb.lo).norm() < tol && (lb.hi - sb.hi).norm() < tol;
}

}  // namespace

std::vector<Profile> extract_sketch_candidates(const Target& target, const FitConfig& cfg) {
    std::vector<ProposedPlane> planes;
    if (target.mesh) {
        planes = propose_sketch_planes(*target.mesh, cfg);
    } else {
        // grid-backed targets: axis-aligned quantile planes over the bounds
        Box3 b = target.bounds;
        for (int axis = 0; axis < 3; ++axis) {
            Vec3 n(0, 0, 0);
            n[axis] = 1;
            for (int k = 1; k <= cfg.n_slices; ++k) {
                double q = b.lo[axis] + (b.hi[axis] - b.lo[axis]) * double(k) / (cfg.n_slices + 1);
                Vec3 origin = b.center();
                origin[axis] = q;
                ProposedPlane p;
                p.plane = Plane::make(origin, n);
                p.reference = p.plane;
                p.source = PlaneSource::residual;
                p.axis = axis;
                planes.push_back(p);
            }
        }
    }

    struct Keyed {
        double key[5];
        Profile profile;
    };
    std::vector<Keyed> keyed;
    for (const auto& pp : planes) {
        std::vector<Loop3D> sections;
        Plane slice_plane = pp.plane;
        for (int attempt = 0; attempt < 3; ++attempt) {
            sections = target.slicer(slice_plane);
            if (!sections.empty() || !target.mesh) break;
            // a plane coplanar with faces can slice to nothing; nudge it
            slice_plane = slice_plane.translated(1e-5);
        }
        if (sections.empty()) continue;
        auto loops = extract_loops(sections, pp.reference, cfg);
        auto profiles = group_profiles(loops, pp.reference);
        if (pp.source == PlaneSource::axis_slice) {
            // hole-free bounding-box rectangles from axis slices describe the
            // bounds, not a feature; profiles with holes stay informative
            profiles.erase(std::remove_if(profiles.begin(), profiles.end(),
                                          [&](const Profile& p) {
                                              return p.holes.empty() &&
                                                     is_bbox_rectangle(p.outer, pp.reference,
                                                                       target.bounds, 0.02);
                                          }),
                           profiles.end());
        }
        for (auto& prof : profiles) {
            prof.source = pp.source;
            Vec2 c(0, 0);
            for (const auto& p : prof.outer.points) c += p;
            c /= double(prof.outer.points.size());
            Vec3 wc = pp.reference.to_world(c);
            Keyed k;
            k.key[0] = pp.reference.normal.x();
            k.key[1] = pp.reference.normal.y();
            k.key[2] = pp.reference.normal.z();
            k.key[3] = pp.reference.origin.dot(pp.reference.normal);
            k.key[4] = wc.x() * 1e6 + wc.y() * 1e3 + wc.z();
            k.profile = std::move(prof);
            keyed.push_back(std::move(k));
        }
    }
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
        return std::lexicographical_compare(a.key, a.key + 5, b.key, b.key + 5);
    });
    // prismatic targets repeat one cross-section across many slicing planes;
    // near-identical outlines along the same normal produce the same
    // canonical candidates, so keep one
    struct LoopSig {
        Vec2 centroid;
        double area, perim;
        Box2 bbox;
    };
    struct Sig {
        Vec3 normal;
        std::vector<LoopSig> loops; // outer first
    };
    auto loop_sig = [](const Loop2D& l) {
        Vec2 c(0, 0);
        for (const auto& q : l.points) c += q;
        c /= double(l.points.size());
        return LoopSig{c, std::abs(l.signed_area()), l.perimeter(), polygon_bounds(l.points)};
    };
    auto signature = [&](const Profile& p) {
        Sig s{p.plane.normal, {loop_sig(p.outer)}};
        for (const auto& h : p.holes) s.loops.push_back(loop_sig(h));
        return s;
    };
    auto same = [](const Sig& a, const Sig& b) {
        if (a.loops.size() != b.loops.size()) return false;
        if (a.normal.dot(b.normal) < std::cos(1.0 * M_PI / 180.0)) return false;
        for (size_t i = 0; i < a.loops.size(); ++i) {
            const LoopSig& x = a.loops[i];
            const LoopSig& y = b.loops[i];
            double scale = std::max({x.perim, y.perim, 1e-6});
            if ((x.centroid - y.centroid).norm() > 0.02 * scale) return false;
            if (std::abs(x.area - y.area) > 0.02 * std::max(x.area, y.area) + 1e-6) return false;
            if (std::abs(x.perim - y.perim) > 0.02 * scale) return false;
            if ((x.bbox.lo - y.bbox.lo).norm() > 0.02 * scale) return false;
            if ((x.bbox.hi - y.bbox.hi).norm() > 0.02 * scale) return false;
        }
        return true;
    };
    std::vector<Profile> out;
    std::vector<Sig> seen;
    out.reserve(keyed.size());
    for (auto& k : keyed) {
        Sig sig = signature(k.profile);
        bool dup = false;
        for (const auto& s : seen)
            if (same(s, sig)) {
                dup = true;
                break;
            }
        if (dup) continue;
        seen.push_back(std::move(sig));
        k.profile.id = int(out.size());
        out.push_back(std::move(k.profile));
    }
    return out;
}

}  // namespace cadfit
