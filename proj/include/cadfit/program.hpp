#pragma once

#include "cadfit/mesh.hpp"
#include "cadfit/sketch.hpp"
#include "cadfit/types.hpp"

#include <optional>
#include <string>
#include <vector>

namespace cadfit {

enum class OpKind { extrude, revolve };
enum class BoolRole { boolean_union, boolean_cut };

enum class CornerKind { fillet, chamfer };
struct CornerFeature {
    int corner;       // index into the profile outer loop
    CornerKind kind;
    double param;     // fillet radius or chamfer setback, > 0
};

// 2D axis in sketch-plane coordinates for revolve operations (full 360 deg).
struct RevolveAxis {
    Vec2 point{0, 0};
    Vec2 dir{0, 1};
};

struct Operation {
    OpKind kind = OpKind::extrude;
    BoolRole role = BoolRole::boolean_union;
    Profile profile;
    double height = 0;        // extrude: along +normal from the plane origin
    RevolveAxis axis;         // revolve only
    std::vector<CornerFeature> corner_features;
};

struct Program {
    std::vector<Operation> ops;
};

// Throws Error(invalid_program) when an operation breaks its invariants
// (non-positive height, revolve profile straddling its axis, corner feature
// parameter out of bounds, cut-first program).
void validate_program(const Program& program);
void validate_operation(const Operation& op);

// Applies one fillet/chamfer to a polygon corner; fillets are polygonized at
// 16 points. Throws on out-of-range corners or oversized parameters.
Polygon2 apply_corner_to_polygon(const Polygon2& poly, int corner, CornerKind kind, double param);
Profile apply_corner_feature(const Profile& profile, int corner, CornerKind kind, double param);

// Executable form of a program: immutable, total membership evaluation.
class Solid {
public:
    explicit Solid(Program program);

    const Program& program() const { return program_; }
    const Box3& bounds() const { return bounds_; }
    bool contains(const Vec3& p) const;
    // Sign-exact local distance estimate (negative inside); drives marching
    // cubes vertex placement.
    double signed_distance(const Vec3& p) const;
    bool op_contains(size_t op_index, const Vec3& p) const;
    double op_signed_distance(size_t op_index, const Vec3& p) const;
    Box3 op_bounds(size_t op_index) const;

private:
    struct CompiledOp {
        OpKind kind;
        BoolRole role;
        Plane plane;
        Polygon2 outer; // corner features applied
        std::vector<Polygon2> holes;
        double height;
        Vec2 axis_point, axis_dir, axis_perp;
        Box2 bounds2;
        Box3 bounds3;
    };
    Program program_;
    std::vector<CompiledOp> ops_;
    Box3 bounds_;

    static bool op_contains_impl(const CompiledOp& op, const Vec3& p);
    static double op_sdf_impl(const CompiledOp& op, const Vec3& p);
};

bool point_in_solid(const Solid& solid, const Vec3& p);

// Marching cubes over the membership field, padded 2 cells beyond bounds.
// Throws Error(empty_solid) when nothing is occupied.
TriMesh tessellate_solid(const Solid& solid, int resolution);

struct SurfaceSamples {
    std::vector<Vec3> points;
    double total_area = 0; // stratification weight total
};

// Reusable sampling tables for one profile; the height sweep evaluates many
// heights against the same triangulation and boundary tables.
class CandidateSampler {
public:
    CandidateSampler(const Profile& profile, OpKind kind, const RevolveAxis& axis);
    // extrude: signed height (slab between min(0,h) and max(0,h));
    // revolve ignores the argument.
    SurfaceSamples sample(double height, size_t n, uint64_t seed) const;

private:
    const Profile profile_;
    OpKind kind_;
    // extrude tables
    std::vector<std::array<Vec2, 3>> tris_;
    std::vector<double> tri_cum_;
    double cap_area_ = 0;
    struct Wall {
        Vec2 a, b;
        double cum;
    };
    std::vector<Wall> walls_;
    double wall_len_ = 0;
    // revolve tables
    Vec2 axis_point_, axis_dir_, axis_perp_;
    struct LatheSeg {
        Vec2 a, b;
        double r0, r1, cum;
    };
    std::vector<LatheSeg> lathe_;
    double lathe_area_ = 0;
};

// Boundary samples of a single candidate operation: extrude caps + lateral
// walls, or the revolve lathe surface. Deterministic per seed.
SurfaceSamples sample_candidate_surface(const Profile& profile, OpKind kind, double height,
                                        const RevolveAxis& axis, size_t n, uint64_t seed);

// Canonical JSON IR.
std::string serialize_program(const Program& program);
Program deserialize_program(const std::string& text);

// CadQuery-style script text; never executed here.
std::string emit_script(const Program& program);

}  // namespace cadfit
