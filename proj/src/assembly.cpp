#include "cadfit/assembly.hpp"

#include <bit>
#include <chrono>
#include <cmath>

namespace cadfit {

namespace {

struct MaskedOp {
    Operation op;
    VoxelGrid mask;
};

Box3 operation_bounds(const Operation& op) {
    Operation u = op;
    u.role = BoolRole::boolean_union;
    Solid s(Program{{u}});
    return s.op_bounds(0);
}

VoxelGrid voxelize_op(const Operation& op, const VoxelGrid& proto) {
    Operation u = op;
    u.role = BoolRole::boolean_union;
    Solid solid(Program{{u}});
    Box3 b = solid.op_bounds(0);
    VoxelGrid mask = VoxelGrid::empty_like(proto);
    auto clamp_idx = [&](double v, int n) { return std::clamp(int(v), 0, n - 1); };
    Vec3 lo_rel = (b.lo - proto.origin) / proto.spacing;
    Vec3 hi_rel = (b.hi - proto.origin) / proto.spacing;
    int x0 = clamp_idx(std::floor(lo_rel.x()), proto.dims[0]);
    int x1 = clamp_idx(std::ceil(hi_rel.x()), proto.dims[0]);
    int y0 = clamp_idx(std::floor(lo_rel.y()), proto.dims[1]);
    int y1 = clamp_idx(std::ceil(hi_rel.y()), proto.dims[1]);
    int z0 = clamp_idx(std::floor(lo_rel.z()), proto.dims[2]);
    int z1 = clamp_idx(std::ceil(hi_rel.z()), proto.dims[2]);

    // fast path: extrusion along a grid axis has a constant footprint along
    // that axis, so the profile test runs once per column
    if (op.kind == OpKind::extrude) {
        const Vec3& n = op.profile.plane.normal;
        int axis = -1;
        for (int a = 0; a < 3; ++a)
            if (std::abs(std::abs(n[a]) - 1.0) < 1e-12) axis = a;
        if (axis >= 0) {
            double o = op.profile.plane.origin[axis];
            double s = n[axis];
            double c_lo = std::min(o, o + s * op.height);
            double c_hi = std::max(o, o + s * op.height);
            int lo_cells[3] = {x0, y0, z0}, hi_cells[3] = {x1, y1, z1};
            int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
            int k0 = clamp_idx(std::floor((c_lo - proto.origin[axis]) / proto.spacing),
                               proto.dims[axis]);
            int k1 = clamp_idx(std::ceil((c_hi - proto.origin[axis]) / proto.spacing),
                               proto.dims[axis]);
            for (int i = lo_cells[a1]; i <= hi_cells[a1]; ++i)
                for (int j = lo_cells[a2]; j <= hi_cells[a2]; ++j) {
                    bool inside = false;
                    bool tested = false;
                    for (int k = k0; k <= k1; ++k) {
                        int idx[3];
                        idx[axis] = k;
                        idx[a1] = i;
                        idx[a2] = j;
                        Vec3 center = mask.cell_center(idx[0], idx[1], idx[2]);
                        double c = center[axis];
                        if (c < c_lo || c > c_hi) continue;
                        if (!tested) {
                            inside = solid.op_contains(0, center);
                            tested = true;
                        }
                        if (inside) mask.set(idx[0], idx[1], idx[2], true);
                    }
                }
            return mask;
        }
    }

    parallel_for(size_t(z1 - z0 + 1), [&](size_t zb, size_t ze) {
        for (size_t dz = zb; dz < ze; ++dz) {
            int z = z0 + int(dz);
            for (int y = y0; y <= y1; ++y)
                for (int x = x0; x <= x1; ++x)
                    if (solid.op_contains(0, mask.cell_center(x, y, z))) mask.set(x, y, z, true);
        }
    });
    return mask;
}

VoxelGrid fold_masks(const VoxelGrid& proto, const std::vector<MaskedOp>& ops,
                     const std::vector<char>* keep = nullptr) {
    VoxelGrid acc = VoxelGrid::empty_like(proto);
    for (size_t i = 0; i < ops.size(); ++i) {
        if (keep && !(*keep)[i]) continue;
        if (ops[i].op.role == BoolRole::boolean_union) {
            for (size_t w = 0; w < acc.bits.size(); ++w) acc.bits[w] |= ops[i].mask.bits[w];
        } else {
            for (size_t w = 0; w < acc.bits.size(); ++w) acc.bits[w] &= ~ops[i].mask.bits[w];
        }
    }
    return acc;
}

double grid_iou(const VoxelGrid& a, const VoxelGrid& b) { return volumetric_iou(a, b); }

// IoU of (S union C) against M in one pass.
double iou_union_with(const VoxelGrid& S, const VoxelGrid& C, const VoxelGrid& M) {
    uint64_t inter = 0, uni = 0;
    for (size_t i = 0; i < S.bits.size(); ++i) {
        uint64_t w = S.bits[i] | C.bits[i];
        inter += std::popcount(w & M.bits[i]);
        uni += std::popcount(w | M.bits[i]);
    }
    return uni == 0 ? 1.0 : double(inter) / double(uni);
}

// Shared voxel state for one assembly session.
struct Assembler {
    VoxelGrid proto; // geometry only
    VoxelGrid target_mask;
    std::vector<MaskedOp> ops;

    static Assembler make(const Target& target, const Box3& extra_bounds, int resolution) {
        Assembler a;
        Box3 b = target.bounds;
        b.expand(extra_bounds);
        double pad = 2.0 * b.longest_side() / std::max(resolution, 1);
        a.proto = make_grid(b.inflated(pad), resolution);
        a.target_mask = VoxelGrid::empty_like(a.proto);
        fill_grid(a.target_mask, target.membership);
        return a;
    }

    double current_iou() const { return grid_iou(fold_masks(proto, ops), target_mask); }

    void append(const Operation& op) { ops.push_back({op, voxelize_op(op, proto)}); }

    Program program() const {
        Program p;
        for (const auto& mo : ops) p.ops.push_back(mo.op);
        return p;
    }
};

// Greedy union selection over precomputed masks; returns picked candidate
// indices and the IoU trace.
struct GreedyOutcome {
    std::vector<int> picked;
    std::vector<double> trace;
};

GreedyOutcome greedy_core(const std::vector<Candidate>& candidates,
                          const std::vector<VoxelGrid>& masks, const VoxelGrid& proto,
                          const VoxelGrid& target_mask) {
    GreedyOutcome out;
    VoxelGrid S = VoxelGrid::empty_like(proto);
    double cur = grid_iou(S, target_mask);
    std::vector<char> used(candidates.size(), 0);
    while (true) {
        int best = -1;
        double best_iou = cur;
        for (size_t c = 0; c < candidates.size(); ++c) {
            if (used[c]) continue;
            double iou = iou_union_with(S, masks[c], target_mask);
            if (iou > best_iou) { // strictly positive gain; first index wins ties
                best_iou = iou;
                best = int(c);
            }
        }
        if (best < 0) break;
        used[best] = 1;
        out.picked.push_back(best);
        for (size_t w = 0; w < S.bits.size(); ++w) S.bits[w] |= masks[best].bits[w];
        cur = best_iou;
        out.trace.push_back(cur);
    }
    return out;
}

// One pruning session over the assembler's op list. Removal is accepted while
// the best removal keeps IoU >= current; ties go to the latest op.
int prune_core(Assembler& ctx, std::vector<double>* trace) {
    int removed = 0;
    while (!ctx.ops.empty()) {
        double cur = ctx.current_iou();
        std::vector<char> keep(ctx.ops.size(), 1);
        int best = -1;
        double best_iou = 0;
        for (size_t i = 0; i < ctx.ops.size(); ++i) {
            keep[i] = 0;
            double iou = grid_iou(fold_masks(ctx.proto, ctx.ops, &keep), ctx.target_mask);
            keep[i] = 1;
            if (iou >= cur && (best < 0 || iou >= best_iou)) { // >= picks the later op on ties
                best = int(i);
                best_iou = iou;
            }
        }
        if (best < 0) break;
        ctx.ops.erase(ctx.ops.begin() + best);
        ++removed;
        if (trace) trace->push_back(best_iou);
    }
    return removed;
}

double corner_turn(const Polygon2& poly, int i) {
    int n = int(poly.size());
    Vec2 u0 = (poly[i] - poly[(i + n - 1) % n]).normalized();
    Vec2 u1 = (poly[(i + 1) % n] - poly[i]).normalized();
    return std::acos(std::clamp(u0.dot(u1), -1.0, 1.0));
}

// Corner-feature recovery over the assembler's ops; appends accepted features
// and keeps masks in sync. Returns the number of accepted features.
int finishing_core(Assembler& ctx, std::vector<double>* trace) {
    int accepted = 0;
    double cur = ctx.current_iou();
    for (size_t oi = 0; oi < ctx.ops.size(); ++oi) {
        if (ctx.ops[oi].op.kind != OpKind::extrude) continue;
        const Polygon2& poly = ctx.ops[oi].op.profile.outer.points;
        int n = int(poly.size());
        if (n < 3 || n > 64) continue; // unsimplified loops have no usable corners
        for (int corner = 0; corner < n; ++corner) {
            bool taken = false;
            for (const auto& f : ctx.ops[oi].op.corner_features)
                if (f.corner == corner) taken = true;
            if (taken) continue;
            double turn = corner_turn(poly, corner);
            if (turn <= 30.0 * M_PI / 180.0) continue;
            double l0 = (poly[corner] - poly[(corner + n - 1) % n]).norm();
            double l1 = (poly[(corner + 1) % n] - poly[corner]).norm();
            double edge_bound = 0.5 * std::min(l0, l1);
            double tan_half = std::tan(0.5 * turn);

            auto eval_feature = [&](CornerKind kind, double param) -> double {
                Operation probe = ctx.ops[oi].op;
                probe.corner_features.push_back({corner, kind, param});
                VoxelGrid mask;
                try {
                    mask = voxelize_op(probe, ctx.proto);
                } catch (const Error&) {
                    return -1.0;
                }
                std::swap(ctx.ops[oi].mask, mask);
                double iou = ctx.current_iou();
                std::swap(ctx.ops[oi].mask, mask);
                return iou;
            };

            double best_iou = cur;
            CornerKind best_kind = CornerKind::fillet;
            double best_param = 0;
            for (CornerKind kind : {CornerKind::fillet, CornerKind::chamfer}) {
                double bound = kind == CornerKind::fillet
                                   ? std::min(edge_bound, edge_bound / std::max(tan_half, 1e-9))
                                   : edge_bound;
                bound *= 0.999;
                if (bound <= 1e-4) continue;
                double probe_param = std::min(0.05, bound);
                double probe_iou = eval_feature(kind, probe_param);
                if (probe_iou <= cur) continue;
                // golden-section refinement over (0, bound]
                constexpr double kGolden = 0.6180339887498949;
                double lo = 1e-4, hi = bound;
                double x1 = hi - kGolden * (hi - lo);
                double x2 = lo + kGolden * (hi - lo);
                double f1 = eval_feature(kind, x1);
                double f2 = eval_feature(kind, x2);
                double kind_best_iou = probe_iou, kind_best_param = probe_param;
                for (int it = 0; it < 18; ++it) {
                    if (f1 >= f2) {
                        if (f1 > kind_best_iou) {
                            kind_best_iou = f1;
                            kind_best_param = x1;
                        }
                        hi = x2;
                        x2 = x1;
                        f2 = f1;
                        x1 = hi - kGolden * (hi - lo);
                        f1 = eval_feature(kind, x1);
                    } else {
                        if (f2 > kind_best_iou) {
                            kind_best_iou = f2;
                            kind_best_param = x2;
                        }
                        lo = x1;
                        x1 = x2;
                        f1 = f2;
                        x2 = lo + kGolden * (hi - lo);
                        f2 = eval_feature(kind, x2);
                    }
                }
                if (kind_best_iou > best_iou) {
                    best_iou = kind_best_iou;
                    best_kind = kind;
                    best_param = kind_best_param;
                }
            }
            if (best_param > 0 && best_iou > cur) {
                ctx.ops[oi].op.corner_features.push_back({corner, best_kind, best_param});
                ctx.ops[oi].mask = voxelize_op(ctx.ops[oi].op, ctx.proto);
                cur = best_iou;
                ++accepted;
                if (trace) trace->push_back(cur);
            }
        }
    }
    return accepted;
}

// Candidate generation for one pass; shared by the public wrappers and the
// iterative driver.
struct PassData {
    std::vector<Profile> profiles;
    std::vector<ProfileScore> scores;
    std::vector<Profile> kept;
    std::vector<Candidate> candidates;
};

PassData run_pass_candidates(const Target& target, const FitConfig& cfg, uint64_t filter_salt) {
    PassData d;
    d.profiles = extract_sketch_candidates(target, cfg);
    d.scores = score_profiles(target, d.profiles, cfg);
    d.kept = filter_profiles(d.profiles, d.scores, cfg.prior_budget,
                             Rng::derive(cfg.seed, filter_salt));
    d.candidates = generate_candidates(d.kept, target, cfg);
    return d;
}

Box3 candidates_bounds(const std::vector<Candidate>& candidates) {
    Box3 b;
    for (const auto& c : candidates) b.expand(operation_bounds(c.op));
    return b;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public operations
// ---------------------------------------------------------------------------

std::pair<Program, Solid> greedy_select(const std::vector<Candidate>& candidates,
                                        const Target& target, const FitConfig& cfg) {
    Assembler ctx = Assembler::make(target, candidates_bounds(candidates), cfg.iou_resolution);
    std::vector<VoxelGrid> masks;
    masks.reserve(candidates.size());
    for (const auto& c : candidates) masks.push_back(voxelize_op(c.op, ctx.proto));
    GreedyOutcome g = greedy_core(candidates, masks, ctx.proto, ctx.target_mask);
    Program p;
    for (int idx : g.picked) {
        Operation op = candidates[idx].op;
        op.role = BoolRole::boolean_union;
        p.ops.push_back(std::move(op));
    }
    return {p, Solid(p)};
}

Program backward_prune(const Program& program, const Target& target, const FitConfig& cfg) {
    Box3 extra;
    for (const auto& op : program.ops) extra.expand(operation_bounds(op));
    Assembler ctx = Assembler::make(target, extra, cfg.iou_resolution);
    for (const auto& op : program.ops) ctx.append(op);
    prune_core(ctx, nullptr);
    return ctx.program();
}

std::tuple<Program, Solid, FitReport> reconstruct_once(const Target& target, const FitConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    FitReport report;
    PassData pass = run_pass_candidates(target, cfg, 0);
    report.profile_count = int(pass.profiles.size());
    report.kept_profile_count = int(pass.kept.size());
    report.candidate_count = int(pass.candidates.size());
    report.profile_scores = pass.scores;

    Assembler ctx = Assembler::make(target, candidates_bounds(pass.candidates),
                                    cfg.iou_resolution);
    std::vector<VoxelGrid> masks;
    masks.reserve(pass.candidates.size());
    for (const auto& c : pass.candidates) masks.push_back(voxelize_op(c.op, ctx.proto));
    GreedyOutcome g = greedy_core(pass.candidates, masks, ctx.proto, ctx.target_mask);
    report.iou_trace = g.trace;
    for (int idx : g.picked) {
        Operation op = pass.candidates[idx].op;
        op.role = BoolRole::boolean_union;
        ctx.ops.push_back({std::move(op), std::move(masks[idx])});
    }
    report.pruned_ops = prune_core(ctx, &report.iou_trace);

    Program program = ctx.program();
    VoxelGrid folded = fold_masks(ctx.proto, ctx.ops);
    report.iou = grid_iou(folded, ctx.target_mask);
    uint64_t m = ctx.target_mask.popcount();
    if (m > 0) {
        Residuals res = compute_residuals(ctx.target_mask, folded);
        report.a = res.a;
        report.b = res.b;
        report.E = res.a + res.b;
    }
    report.invalid = program.ops.empty();
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    Solid solid(program);
    return {std::move(program), std::move(solid), std::move(report)};
}

Program recover_finishing(const Program& program, const Target& target, const FitConfig& cfg) {
    if (program.ops.empty())
        throw Error(ErrorKind::domain_error, "recover_finishing: empty program");
    Box3 extra;
    for (const auto& op : program.ops) extra.expand(operation_bounds(op));
    Assembler ctx = Assembler::make(target, extra, cfg.iou_resolution);
    for (const auto& op : program.ops) ctx.append(op);
    finishing_core(ctx, nullptr);
    return ctx.program();
}

std::pair<Program, FitReport> iterative_fit(const TriMesh& mesh, const FitConfig& cfg) {
    auto t0 = std::chrono::steady_clock::now();
    if (!is_watertight(mesh))
        throw Error(ErrorKind::not_watertight, "iterative_fit: mesh is not watertight");
    if (cfg.threads >= 0) set_thread_count(cfg.threads);
    Target target = make_mesh_target(mesh, size_t(cfg.target_surface_samples),
                                     Rng::derive(cfg.seed, 0x5a3b1e));

    FitReport report;
    PassData pass = run_pass_candidates(target, cfg, 0);
    report.profile_count = int(pass.profiles.size());
    report.kept_profile_count = int(pass.kept.size());
    report.candidate_count = int(pass.candidates.size());
    report.profile_scores = pass.scores;

    // one master grid for the whole fit: target plus every first-pass candidate
    Assembler ctx =
        Assembler::make(target, candidates_bounds(pass.candidates), cfg.iou_resolution);
    std::vector<VoxelGrid> masks;
    masks.reserve(pass.candidates.size());
    for (const auto& c : pass.candidates) masks.push_back(voxelize_op(c.op, ctx.proto));
    GreedyOutcome g = greedy_core(pass.candidates, masks, ctx.proto, ctx.target_mask);
    report.iou_trace = g.trace;
    for (int idx : g.picked) {
        Operation op = pass.candidates[idx].op;
        op.role = BoolRole::boolean_union;
        ctx.ops.push_back({std::move(op), std::move(masks[idx])});
    }
    masks.clear();
    report.pruned_ops += prune_core(ctx, &report.iou_trace);

    // residual union/cut iterations on the master grid
    for (int iter = 1; iter <= cfg.max_residual_iters; ++iter) {
        VoxelGrid folded = fold_masks(ctx.proto, ctx.ops);
        if (ctx.target_mask.popcount() == 0) break;
        Residuals res = compute_residuals(ctx.target_mask, folded);
        if (res.a <= cfg.residual_threshold && res.b <= cfg.residual_threshold) break;
        report.residual_iters = iter;
        double cur = grid_iou(folded, ctx.target_mask);

        auto try_subprogram = [&](const VoxelGrid& region, BoolRole role, uint64_t salt) {
            if (region.popcount() == 0) return;
            Target rt;
            try {
                rt = residual_target(region);
            } catch (const Error&) {
                return;
            }
            FitConfig sub_cfg = cfg;
            sub_cfg.seed = Rng::derive(cfg.seed, salt);
            auto [sub_program, sub_solid, sub_report] = reconstruct_once(rt, sub_cfg);
            if (sub_program.ops.empty()) return;
            size_t before = ctx.ops.size();
            for (const auto& op : sub_program.ops) {
                Operation placed = op;
                placed.role = role;
                ctx.append(placed);
            }
            double iou = ctx.current_iou();
            if (iou >= cur) { // monotone acceptance gate
                cur = iou;
                report.iou_trace.push_back(iou);
            } else {
                ctx.ops.resize(before); // reject the whole sub-program
            }
        };
        try_subprogram(res.plus, BoolRole::boolean_union, 0x9000 + uint64_t(iter) * 2);
        try_subprogram(res.minus, BoolRole::boolean_cut, 0x9001 + uint64_t(iter) * 2);
    }

    finishing_core(ctx, &report.iou_trace);
    report.pruned_ops += prune_core(ctx, &report.iou_trace);

    Program program = ctx.program();
    VoxelGrid folded = fold_masks(ctx.proto, ctx.ops);
    report.iou = grid_iou(folded, ctx.target_mask);
    if (ctx.target_mask.popcount() > 0) {
        Residuals res = compute_residuals(ctx.target_mask, folded);
        report.a = res.a;
        report.b = res.b;
        report.E = res.a + res.b;
    }
    report.invalid = program.ops.empty();
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return {std::move(program), std::move(report)};
}

}  // namespace cadfit
