#include "cadfit/runner.hpp"

#include <cmath>

namespace cadfit {

Complexity complexity_from_name(const std::string& name) {
    if (name == "easy") return Complexity::easy;
    if (name == "medium") return Complexity::medium;
    if (name == "hard") return Complexity::hard;
    throw Error(ErrorKind::config_error, "complexity must be easy, medium or hard");
}

namespace {

Polygon2 make_rect(double w, double h, const Vec2& center) {
    return {center + Vec2(-w / 2, -h / 2), center + Vec2(w / 2, -h / 2),
            center + Vec2(w / 2, h / 2), center + Vec2(-w / 2, h / 2)};
}

Polygon2 make_ngon(int n, double r, const Vec2& center, double phase) {
    Polygon2 p;
    for (int i = 0; i < n; ++i) {
        double a = phase + 2 * M_PI * i / n;
        p.push_back(center + r * Vec2(std::cos(a), std::sin(a)));
    }
    return p;
}

Plane random_axis_plane(Rng& rng, double offset_lo, double offset_hi) {
    int axis = int(rng.uniform_int(3));
    Vec3 n(0, 0, 0);
    n[axis] = rng.uniform() < 0.5 ? 1.0 : -1.0;
    Vec3 origin = n * rng.uniform(offset_lo, offset_hi);
    return Plane::make(origin, n);
}

Operation random_union_op(Rng& rng, bool allow_revolve) {
    Operation op;
    op.role = BoolRole::boolean_union;
    double kind_roll = rng.uniform();
    if (allow_revolve && kind_roll < 0.2) {
        // revolved annular block: rectangle offset from a vertical axis
        op.kind = OpKind::revolve;
        op.profile.plane = Plane::make(Vec3(0, 0, 0), Vec3(0, 0, 1));
        double r_in = rng.uniform(0.15, 0.4);
        double r_out = r_in + rng.uniform(0.15, 0.4);
        double tall = rng.uniform(0.25, 0.8);
        op.profile.outer.points = make_rect(r_out - r_in, tall, Vec2(0.5 * (r_in + r_out), 0));
        op.axis.point = Vec2(0, 0);
        op.axis.dir = Vec2(0, 1);
        return op;
    }
    op.kind = OpKind::extrude;
    op.profile.plane = random_axis_plane(rng, -0.7, 0.0);
    op.height = rng.uniform(0.3, 1.2);
    Vec2 center(rng.uniform(-0.25, 0.25), rng.uniform(-0.25, 0.25));
    double shape_roll = rng.uniform();
    if (shape_roll < 0.45) {
        op.profile.outer.points =
            make_rect(rng.uniform(0.4, 1.3), rng.uniform(0.4, 1.3), center);
    } else if (shape_roll < 0.75) {
        op.profile.outer.points = make_ngon(48, rng.uniform(0.25, 0.6), center, 0.0);
    } else {
        int sides = 5 + int(rng.uniform_int(3)); // 5..7
        op.profile.outer.points =
            make_ngon(sides, rng.uniform(0.3, 0.6), center, rng.uniform(0.0, M_PI));
    }
    // occasional through-hole
    if (shape_roll < 0.45 && rng.uniform() < 0.3) {
        Box2 b = polygon_bounds(op.profile.outer.points);
        double hr = 0.25 * std::min(b.extent().x(), b.extent().y());
        Polygon2 hole = make_ngon(32, hr, center, 0.0);
        std::reverse(hole.begin(), hole.end());
        op.profile.holes.push_back(Loop2D{hole});
    }
    return op;
}

Operation random_cut_op(Rng& rng, const Solid& current) {
    // a block or cylinder centered inside the current solid
    Operation op;
    op.kind = OpKind::extrude;
    op.role = BoolRole::boolean_cut;
    Box3 b = current.bounds();
    Vec3 inside;
    for (int tries = 0; tries < 200; ++tries) {
        inside = Vec3(rng.uniform(b.lo.x(), b.hi.x()), rng.uniform(b.lo.y(), b.hi.y()),
                      rng.uniform(b.lo.z(), b.hi.z()));
        if (current.contains(inside)) break;
    }
    int axis = int(rng.uniform_int(3));
    Vec3 n(0, 0, 0);
    n[axis] = 1.0;
    double span = b.extent()[axis];
    Plane plane = Plane::make(inside - n * span, n);
    op.profile.plane = plane;
    op.height = 2.0 * span; // cut all the way through
    Vec2 center = plane.to_plane(inside);
    if (rng.uniform() < 0.5) {
        op.profile.outer.points =
            make_rect(rng.uniform(0.2, 0.5), rng.uniform(0.2, 0.5), center);
    } else {
        op.profile.outer.points = make_ngon(40, rng.uniform(0.12, 0.3), center, 0.0);
    }
    return op;
}

void maybe_add_corner_features(Rng& rng, Operation& op, int max_features) {
    if (op.kind != OpKind::extrude) return;
    const Polygon2& poly = op.profile.outer.points;
    if (poly.size() < 3 || poly.size() > 8) return; // rectangles and small n-gons only
    int n = int(poly.size());
    int added = 0;
    for (int corner = 0; corner < n && added < max_features; ++corner) {
        if (rng.uniform() > 0.5) continue;
        double l0 = (poly[corner] - poly[(corner + n - 1) % n]).norm();
        double l1 = (poly[(corner + 1) % n] - poly[corner]).norm();
        double bound = 0.4 * std::min(l0, l1);
        if (bound < 0.08) continue;
        CornerFeature f;
        f.corner = corner;
        f.kind = rng.uniform() < 0.5 ? CornerKind::fillet : CornerKind::chamfer;
        f.param = rng.uniform(0.08, bound);
        Operation trial = op;
        trial.corner_features.push_back(f);
        try {
            validate_operation(trial);
        } catch (const Error&) {
            continue;
        }
        op.corner_features.push_back(f);
        ++added;
    }
}

// Volume probe: fraction of sample points inside.
double occupancy(const Solid& solid, const std::vector<Vec3>& probes) {
    size_t n = 0;
    for (const auto& p : probes) n += solid.contains(p) ? 1 : 0;
    return double(n) / double(probes.size());
}

}  // namespace

Program generate_program(Complexity complexity, Rng& rng) {
    int n_ops, n_cuts, n_features;
    switch (complexity) {
        case Complexity::easy:
            n_ops = 1 + int(rng.uniform_int(2));
            n_cuts = 0;
            n_features = 0;
            break;
        case Complexity::medium:
            n_ops = 3 + int(rng.uniform_int(2));
            n_cuts = 1;
            n_features = 0;
            break;
        default:
            n_ops = 5 + int(rng.uniform_int(2));
            n_cuts = 1 + int(rng.uniform_int(2));
            n_features = 2;
            break;
    }
    n_cuts = std::min(n_cuts, n_ops - 1);

    // shared probe cloud for meaningful-op checks
    std::vector<Vec3> probes;
    probes.reserve(4000);
    Rng probe_rng(rng.next());
    for (int i = 0; i < 4000; ++i)
        probes.push_back(Vec3(probe_rng.uniform(-1.5, 1.5), probe_rng.uniform(-1.5, 1.5),
                              probe_rng.uniform(-1.5, 1.5)));

    Program program;
    double occ = 0;
    for (int i = 0; i < n_ops; ++i) {
        bool want_cut = i > 0 && (n_ops - i) <= n_cuts;
        bool placed = false;
        for (int attempt = 0; attempt < 50 && !placed; ++attempt) {
            Operation op = want_cut ? random_cut_op(rng, Solid(program))
                                    : random_union_op(rng, i == 0);
            Program trial = program;
            trial.ops.push_back(op);
            try {
                validate_program(trial);
            } catch (const Error&) {
                continue;
            }
            Solid s(trial);
            double new_occ = occupancy(s, probes);
            // each op must change the solid noticeably but not erase it
            double delta = std::abs(new_occ - occ);
            if (new_occ < 0.01 || delta < 0.005) continue;
            program = std::move(trial);
            occ = new_occ;
            placed = true;
            if (want_cut) --n_cuts;
        }
        if (!placed && want_cut) --n_cuts; // rare; keep the program valid
    }
    // guarantee the medium/hard cut contract even after retries
    if (complexity != Complexity::easy) {
        bool has_cut = false;
        for (const auto& op : program.ops)
            if (op.role == BoolRole::boolean_cut) has_cut = true;
        if (!has_cut) {
            for (int attempt = 0; attempt < 100 && !has_cut; ++attempt) {
                Operation op = random_cut_op(rng, Solid(program));
                Program trial = program;
                trial.ops.push_back(op);
                try {
                    validate_program(trial);
                } catch (const Error&) {
                    continue;
                }
                Solid s(trial);
                double new_occ = occupancy(s, probes);
                if (new_occ < 0.01 || std::abs(new_occ - occ) < 0.005) continue;
                program = std::move(trial);
                has_cut = true;
            }
        }
    }
    if (complexity == Complexity::hard) {
        int budget = n_features;
        for (auto& op : program.ops) {
            if (budget <= 0) break;
            if (op.role != BoolRole::boolean_union) continue;
            size_t before = op.corner_features.size();
            maybe_add_corner_features(rng, op, budget);
            budget -= int(op.corner_features.size() - before);
        }
    }
    validate_program(program);
    return program;
}

}  // namespace cadfit
