#include "cadfit/polygon.hpp"

#include <cmath>
#include <list>

namespace cadfit {

double signed_area(const Polygon2& poly) {
    double a = 0;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        a += p.x() * q.y() - q.x() * p.y();
    }
    return 0.5 * a;
}

double perimeter(const Polygon2& poly) {
    double len = 0;
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i) len += (poly[(i + 1) % n] - poly[i]).norm();
    return len;
}

Box2 polygon_bounds(const Polygon2& poly) {
    Box2 b;
    for (const auto& p : poly) b.expand(p);
    return b;
}

bool point_in_polygon(const Polygon2& poly, const Vec2& p) {
    bool inside = false;
    size_t n = poly.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[j];
        if ((a.y() > p.y()) != (b.y() > p.y())) {
            double x = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
            if (p.x() < x) inside = !inside;
        }
    }
    return inside;
}

bool point_in_region(const Polygon2& outer, const std::vector<Polygon2>& holes, const Vec2& p) {
    bool inside = point_in_polygon(outer, p);
    for (const auto& h : holes)
        if (point_in_polygon(h, p)) inside = !inside;
    return inside;
}

static double segment_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
    Vec2 d = b - a;
    double len2 = d.squaredNorm();
    double t = len2 > 0 ? std::clamp((p - a).dot(d) / len2, 0.0, 1.0) : 0.0;
    return (a + t * d - p).norm();
}

double distance_to_boundary(const Polygon2& poly, const Vec2& p) {
    double best = std::numeric_limits<double>::max();
    size_t n = poly.size();
    for (size_t i = 0; i < n; ++i)
        best = std::min(best, segment_distance(poly[i], poly[(i + 1) % n], p));
    return best;
}

double region_signed_distance(const Polygon2& outer, const std::vector<Polygon2>& holes,
                              const Vec2& p) {
    double d = distance_to_boundary(outer, p);
    for (const auto& h : holes) d = std::min(d, distance_to_boundary(h, p));
    return point_in_region(outer, holes, p) ? -d : d;
}

Polygon2 resample_closed(const Polygon2& poly, int n) {
    Polygon2 out;
    if (poly.size() < 2 || n < 3) return out;
    double total = perimeter(poly);
    if (total <= 0) return out;
    out.reserve(n);
    double step = total / n;
    size_t seg = 0;
    double seg_used = 0;
    Vec2 a = poly[0], b = poly[1 % poly.size()];
    double seg_len = (b - a).norm();
    out.push_back(poly[0]);
    double need = step;
    while (int(out.size()) < n) {
        double remain = seg_len - seg_used;
        if (remain >= need) {
            seg_used += need;
            out.push_back(a + (b - a) * (seg_len > 0 ? seg_used / seg_len : 0.0));
            need = step;
        } else {
            need -= remain;
            seg = (seg + 1) % poly.size();
            if (seg == 0) break; // numeric tail; stop rather than loop forever
            a = poly[seg];
            b = poly[(seg + 1) % poly.size()];
            seg_len = (b - a).norm();
            seg_used = 0;
        }
    }
    while (int(out.size()) < n) out.push_back(poly[0]);
    return out;
}

// ---------------------------------------------------------------------------
// Ear clipping with hole bridging
// ---------------------------------------------------------------------------

namespace {

double cross2(const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
}

bool in_triangle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& p) {
    double d1 = cross2(a, b, p);
    double d2 = cross2(b, c, p);
    double d3 = cross2(c, a, p);
    bool neg = d1 < 0 || d2 < 0 || d3 < 0;
    bool pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(neg && pos);
}

bool segments_cross(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    double d1 = cross2(c, d, a);
    double d2 = cross2(c, d, b);
    double d3 = cross2(a, b, c);
    double d4 = cross2(a, b, d);
    return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) &&
           ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

// Merge one hole into the outer boundary with a zero-width bridge at mutually
// visible vertices.
Polygon2 bridge_hole(const Polygon2& outer, const Polygon2& hole) {
    size_t hn = hole.size(), on = outer.size();
    // hole vertex with max x
    size_t hi = 0;
    for (size_t i = 1; i < hn; ++i)
        if (hole[i].x() > hole[hi].x()) hi = i;
    // pick the visible outer vertex minimizing distance with a clear segment
    size_t best = size_t(-1);
    double best_d = std::numeric_limits<double>::max();
    for (size_t oi = 0; oi < on; ++oi) {
        if (outer[oi].x() < hole[hi].x()) continue;
        bool blocked = false;
        for (size_t e = 0; e < on && !blocked; ++e) {
            size_t e2 = (e + 1) % on;
            if (e == oi || e2 == oi) continue;
            if (segments_cross(hole[hi], outer[oi], outer[e], outer[e2])) blocked = true;
        }
        for (size_t e = 0; e < hn && !blocked; ++e) {
            size_t e2 = (e + 1) % hn;
            if (e == hi || e2 == hi) continue;
            if (segments_cross(hole[hi], outer[oi], hole[e], hole[e2])) blocked = true;
        }
        if (blocked) continue;
        double d = (outer[oi] - hole[hi]).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = oi;
        }
    }
    if (best == size_t(-1)) {
        // fall back to the nearest outer vertex; slight overlap is tolerable
        best = 0;
        for (size_t oi = 1; oi < on; ++oi)
            if ((outer[oi] - hole[hi]).squaredNorm() < (outer[best] - hole[hi]).squaredNorm())
                best = oi;
    }
    Polygon2 merged;
    merged.reserve(on + hn + 2);
    for (size_t i = 0; i <= best; ++i) merged.push_back(outer[i]);
    for (size_t i = 0; i <= hn; ++i) merged.push_back(hole[(hi + i) % hn]);
    merged.push_back(outer[best]);
    for (size_t i = best + 1; i < on; ++i) merged.push_back(outer[i]);
    return merged;
}

}  // namespace

std::vector<std::array<Vec2, 3>> triangulate_region(const Polygon2& outer,
                                                    const std::vector<Polygon2>& holes) {
    Polygon2 poly = outer;
    if (signed_area(poly) < 0) std::reverse(poly.begin(), poly.end());
    // bridge holes in decreasing max-x order
    std::vector<Polygon2> hs = holes;
    for (auto& h : hs)
        if (signed_area(h) > 0) std::reverse(h.begin(), h.end());
    std::sort(hs.begin(), hs.end(), [](const Polygon2& a, const Polygon2& b) {
        auto mx = [](const Polygon2& p) {
            double m = std::numeric_limits<double>::lowest();
            for (const auto& v : p) m = std::max(m, v.x());
            return m;
        };
        return mx(a) > mx(b);
    });
    for (const auto& h : hs) poly = bridge_hole(poly, h);

    std::vector<std::array<Vec2, 3>> tris;
    std::vector<int> idx(poly.size());
    for (size_t i = 0; i < poly.size(); ++i) idx[i] = int(i);
    int guard = 0;
    while (idx.size() > 3 && guard < int(poly.size()) * int(poly.size())) {
        bool clipped = false;
        for (size_t i = 0; i < idx.size(); ++i) {
            size_t i0 = idx[(i + idx.size() - 1) % idx.size()];
            size_t i1 = idx[i];
            size_t i2 = idx[(i + 1) % idx.size()];
            const Vec2& a = poly[i0];
            const Vec2& b = poly[i1];
            const Vec2& c = poly[i2];
            if (cross2(a, b, c) <= 1e-16) continue; // reflex or degenerate
            bool ear = true;
            for (size_t j : idx) {
                if (j == i0 || j == i1 || j == i2) continue;
                // skip duplicated bridge vertices
                if ((poly[j] - a).squaredNorm() < 1e-24 || (poly[j] - b).squaredNorm() < 1e-24 ||
                    (poly[j] - c).squaredNorm() < 1e-24)
                    continue;
                if (in_triangle(a, b, c, poly[j])) {
                    ear = false;
                    break;
                }
            }
            if (ear) {
                tris.push_back({a, b, c});
                idx.erase(idx.begin() + i);
                clipped = true;
                break;
            }
        }
        if (!clipped) {
            // stuck on degeneracy: drop the vertex with the flattest corner
            size_t worst = 0;
            double worst_abs = std::numeric_limits<double>::max();
            for (size_t i = 0; i < idx.size(); ++i) {
                const Vec2& a = poly[idx[(i + idx.size() - 1) % idx.size()]];
                const Vec2& b = poly[idx[i]];
                const Vec2& c = poly[idx[(i + 1) % idx.size()]];
                double ab = std::abs(cross2(a, b, c));
                if (ab < worst_abs) {
                    worst_abs = ab;
                    worst = i;
                }
            }
            idx.erase(idx.begin() + worst);
        }
        ++guard;
    }
    if (idx.size() == 3) tris.push_back({poly[idx[0]], poly[idx[1]], poly[idx[2]]});
    return tris;
}

}  // namespace cadfit
