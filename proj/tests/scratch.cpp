#include <doctest.h>
#include "cadfit/assembly.hpp"
#include "cadfit/candidates.hpp"
#include "cadfit/prior.hpp"
#include <chrono>
#include <cstdio>

using namespace cadfit;
using Clock = std::chrono::steady_clock;
static double ms(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double, std::milli>(b - a).count();
}

TEST_CASE("profile stages") {
    TriMesh mesh = load_mesh("/tmp/smoke/genm/gen_000.stl");
    auto norm = normalize_mesh(mesh);
    printf("faces: %zu\n", norm.mesh.faces.size());
    FitConfig cfg;
    auto t0 = Clock::now();
    Target target = make_mesh_target(norm.mesh, 8192, 1);
    auto t1 = Clock::now();
    printf("make_target: %.0f ms\n", ms(t0, t1));
    auto profiles = extract_sketch_candidates(target, cfg);
    auto t2 = Clock::now();
    printf("extract (%zu profiles): %.0f ms\n", profiles.size(), ms(t1, t2));
    auto scores = score_profiles(target, profiles, cfg);
    auto kept = filter_profiles(profiles, scores, cfg.prior_budget, 1);
    auto t3 = Clock::now();
    printf("prior (%zu kept): %.0f ms\n", kept.size(), ms(t2, t3));
    auto cands = generate_candidates(kept, target, cfg);
    auto t4 = Clock::now();
    printf("candidates (%zu): %.0f ms\n", cands.size(), ms(t3, t4));
    int unsimplified = 0;
    for (auto& c : cands) if (c.op.profile.outer.points.size() > 64) unsimplified++;
    printf("unsimplified candidates: %d\n", unsimplified);
    auto [prog, solid] = greedy_select(cands, target, cfg);
    auto t5 = Clock::now();
    printf("greedy (%zu ops): %.0f ms\n", prog.ops.size(), ms(t4, t5));
    auto pruned = backward_prune(prog, target, cfg);
    auto t6 = Clock::now();
    printf("prune (%zu ops): %.0f ms\n", pruned.ops.size(), ms(t5, t6));
}
