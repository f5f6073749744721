#include "cadfit/program.hpp"

#include <json.hpp>

#include <cmath>
#include <sstream>

namespace cadfit {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json vec3_json(const Vec3& v) { return ordered_json::array({v.x(), v.y(), v.z()}); }
ordered_json vec2_json(const Vec2& v) { return ordered_json::array({v.x(), v.y()}); }

ordered_json loop_json(const Loop2D& loop) {
    ordered_json arr = ordered_json::array();
    for (const auto& p : loop.points) arr.push_back(vec2_json(p));
    return arr;
}

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw Error(ErrorKind::invalid_program, path + ": " + what);
}

double get_number(const ordered_json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

Vec3 get_vec3(const ordered_json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 3) fail(path, "expected [x, y, z]");
    return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]"),
            get_number(j[2], path + "[2]")};
}

Vec2 get_vec2(const ordered_json& j, const std::string& path) {
    if (!j.is_array() || j.size() != 2) fail(path, "expected [u, v]");
    return {get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]")};
}

Loop2D get_loop(const ordered_json& j, const std::string& path) {
    if (!j.is_array() || j.size() < 3) fail(path, "expected a loop of >= 3 [u, v] points");
    Loop2D loop;
    for (size_t i = 0; i < j.size(); ++i)
        loop.points.push_back(get_vec2(j[i], path + "[" + std::to_string(i) + "]"));
    return loop;
}

}  // namespace

std::string serialize_program(const Program& program) {
    validate_program(program);
    ordered_json root;
    root["version"] = 1;
    ordered_json ops = ordered_json::array();
    for (const auto& op : program.ops) {
        ordered_json j;
        j["kind"] = op.kind == OpKind::extrude ? "extrude" : "revolve";
        j["role"] = op.role == BoolRole::boolean_union ? "union" : "cut";
        ordered_json plane;
        plane["origin"] = vec3_json(op.profile.plane.origin);
        plane["normal"] = vec3_json(op.profile.plane.normal);
        plane["u_axis"] = vec3_json(op.profile.plane.u_axis);
        j["plane"] = plane;
        ordered_json prof;
        prof["outer"] = loop_json(op.profile.outer);
        ordered_json holes = ordered_json::array();
        for (const auto& h : op.profile.holes) holes.push_back(loop_json(h));
        prof["holes"] = holes;
        j["profile"] = prof;
        if (op.kind == OpKind::extrude) {
            j["height"] = op.height;
        } else {
            ordered_json axis;
            axis["point"] = vec2_json(op.axis.point);
            axis["dir"] = vec2_json(op.axis.dir);
            j["axis"] = axis;
        }
        if (!op.corner_features.empty()) {
            ordered_json feats = ordered_json::array();
            for (const auto& f : op.corner_features) {
                ordered_json fj;
                fj["corner"] = f.corner;
                fj["kind"] = f.kind == CornerKind::fillet ? "fillet" : "chamfer";
                fj["param"] = f.param;
                feats.push_back(fj);
            }
            j["corner_features"] = feats;
        }
        ops.push_back(j);
    }
    root["ops"] = ops;
    return root.dump();
}

Program deserialize_program(const std::string& text) {
    ordered_json root;
    try {
        root = ordered_json::parse(text);
    } catch (const std::exception& e) {
        throw Error(ErrorKind::malformed_input, std::string("program JSON parse error: ") +
                                                    e.what());
    }
    if (!root.is_object()) fail("$", "expected an object");
    if (!root.contains("version") || !root["version"].is_number_integer() ||
        root["version"].get<int>() != 1)
        fail("version", "expected 1");
    if (!root.contains("ops") || !root["ops"].is_array()) fail("ops", "expected an array");

    Program program;
    for (size_t i = 0; i < root["ops"].size(); ++i) {
        std::string base = "ops[" + std::to_string(i) + "]";
        const auto& j = root["ops"][i];
        if (!j.is_object()) fail(base, "expected an object");
        Operation op;
        std::string kind = j.value("kind", "");
        if (kind == "extrude")
            op.kind = OpKind::extrude;
        else if (kind == "revolve")
            op.kind = OpKind::revolve;
        else
            fail(base + ".kind", "expected \"extrude\" or \"revolve\"");
        std::string role = j.value("role", "");
        if (role == "union")
            op.role = BoolRole::boolean_union;
        else if (role == "cut")
            op.role = BoolRole::boolean_cut;
        else
            fail(base + ".role", "expected \"union\" or \"cut\"");
        if (!j.contains("plane") || !j["plane"].is_object()) fail(base + ".plane", "missing");
        const auto& pj = j["plane"];
        op.profile.plane.origin = get_vec3(pj.value("origin", ordered_json()), base + ".plane.origin");
        op.profile.plane.normal = get_vec3(pj.value("normal", ordered_json()), base + ".plane.normal");
        op.profile.plane.u_axis = get_vec3(pj.value("u_axis", ordered_json()), base + ".plane.u_axis");
        if (std::abs(op.profile.plane.normal.norm() - 1.0) > 1e-6)
            fail(base + ".plane.normal", "must be unit length");
        if (std::abs(op.profile.plane.u_axis.norm() - 1.0) > 1e-6)
            fail(base + ".plane.u_axis", "must be unit length");
        if (std::abs(op.profile.plane.normal.dot(op.profile.plane.u_axis)) > 1e-6)
            fail(base + ".plane.u_axis", "must be orthogonal to normal");
        if (!j.contains("profile") || !j["profile"].is_object()) fail(base + ".profile", "missing");
        op.profile.outer =
            get_loop(j["profile"].value("outer", ordered_json()), base + ".profile.outer");
        if (j["profile"].contains("holes")) {
            const auto& hj = j["profile"]["holes"];
            if (!hj.is_array()) fail(base + ".profile.holes", "expected an array");
            for (size_t h = 0; h < hj.size(); ++h)
                op.profile.holes.push_back(
                    get_loop(hj[h], base + ".profile.holes[" + std::to_string(h) + "]"));
        }
        if (op.kind == OpKind::extrude) {
            if (!j.contains("height")) fail(base + ".height", "missing");
            op.height = get_number(j["height"], base + ".height");
            if (!(op.height > 0)) fail(base + ".height", "must be > 0");
        } else {
            if (!j.contains("axis") || !j["axis"].is_object()) fail(base + ".axis", "missing");
            op.axis.point = get_vec2(j["axis"].value("point", ordered_json()), base + ".axis.point");
            op.axis.dir = get_vec2(j["axis"].value("dir", ordered_json()), base + ".axis.dir");
        }
        if (j.contains("corner_features")) {
            const auto& fj = j["corner_features"];
            if (!fj.is_array()) fail(base + ".corner_features", "expected an array");
            for (size_t f = 0; f < fj.size(); ++f) {
                std::string fbase = base + ".corner_features[" + std::to_string(f) + "]";
                if (!fj[f].is_object()) fail(fbase, "expected an object");
                CornerFeature feat;
                if (!fj[f].contains("corner") || !fj[f]["corner"].is_number_integer())
                    fail(fbase + ".corner", "expected an integer");
                feat.corner = fj[f]["corner"].get<int>();
                std::string fk = fj[f].value("kind", "");
                if (fk == "fillet")
                    feat.kind = CornerKind::fillet;
                else if (fk == "chamfer")
                    feat.kind = CornerKind::chamfer;
                else
                    fail(fbase + ".kind", "expected \"fillet\" or \"chamfer\"");
                feat.param = get_number(fj[f].value("param", ordered_json()), fbase + ".param");
                if (!(feat.param > 0)) fail(fbase + ".param", "must be > 0");
                op.corner_features.push_back(feat);
            }
        }
        program.ops.push_back(std::move(op));
    }
    validate_program(program);
    return program;
}

// ---------------------------------------------------------------------------
// Script emission
// ---------------------------------------------------------------------------

namespace {

std::string num(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}

void emit_wire(std::ostringstream& out, const Polygon2& poly, const std::string& indent) {
    Loop2D loop{poly};
    PrimitiveChain chain = fit_primitives(loop, 0.01);
    if (chain.elements.size() == 1 && std::holds_alternative<Circle>(chain.elements[0])) {
        const auto& c = std::get<Circle>(chain.elements[0]);
        out << indent << ".center(" << num(c.center.x()) << ", " << num(c.center.y()) << ")"
            << ".circle(" << num(c.radius) << ")\n";
        return;
    }
    bool first = true;
    for (const auto& el : chain.elements) {
        if (std::holds_alternative<LineSegment>(el)) {
            const auto& s = std::get<LineSegment>(el);
            if (first) out << indent << ".moveTo(" << num(s.p0.x()) << ", " << num(s.p0.y()) << ")\n";
            out << indent << ".lineTo(" << num(s.p1.x()) << ", " << num(s.p1.y()) << ")\n";
        } else if (std::holds_alternative<Arc>(el)) {
            const auto& a = std::get<Arc>(el);
            Vec2 p0 = a.point_at(0.0), mid = a.point_at(0.5), p1 = a.point_at(1.0);
            if (first) out << indent << ".moveTo(" << num(p0.x()) << ", " << num(p0.y()) << ")\n";
            out << indent << ".threePointArc((" << num(mid.x()) << ", " << num(mid.y()) << "), ("
                << num(p1.x()) << ", " << num(p1.y()) << "))\n";
        } else if (std::holds_alternative<Polyline>(el)) {
            const auto& pl = std::get<Polyline>(el);
            if (pl.points.empty()) continue;
            if (first)
                out << indent << ".moveTo(" << num(pl.points[0].x()) << ", "
                    << num(pl.points[0].y()) << ")\n";
            out << indent << ".polyline([";
            for (size_t i = first ? 1 : 0; i < pl.points.size(); ++i) {
                if (i > (first ? 1u : 0u)) out << ", ";
                out << "(" << num(pl.points[i].x()) << ", " << num(pl.points[i].y()) << ")";
            }
            out << "])\n";
        }
        first = false;
    }
    out << indent << ".close()\n";
}

}  // namespace

std::string emit_script(const Program& program) {
    std::ostringstream out;
    out << "import cadquery as cq\n\n";
    for (size_t i = 0; i < program.ops.size(); ++i) {
        const Operation& op = program.ops[i];
        const Plane& pl = op.profile.plane;
        out << "wp" << i << " = cq.Workplane(cq.Plane(origin=(" << num(pl.origin.x()) << ", "
            << num(pl.origin.y()) << ", " << num(pl.origin.z()) << "), xDir=(" << num(pl.u_axis.x())
            << ", " << num(pl.u_axis.y()) << ", " << num(pl.u_axis.z()) << "), normal=("
            << num(pl.normal.x()) << ", " << num(pl.normal.y()) << ", " << num(pl.normal.z())
            << ")))\n";
        out << "part" << i << " = (wp" << i << "\n";
        Loop2D outer{op.profile.outer};
        emit_wire(out, op.profile.outer.points, "    ");
        for (const auto& hole : op.profile.holes) emit_wire(out, hole.points, "    ");
        if (op.kind == OpKind::extrude) {
            out << "    .extrude(" << num(op.height) << ")\n";
        } else {
            Vec2 a = op.axis.point;
            Vec2 b = op.axis.point + op.axis.dir;
            out << "    .revolve(360.0, (" << num(a.x()) << ", " << num(a.y()) << "), ("
                << num(b.x()) << ", " << num(b.y()) << "))\n";
        }
        out << ")\n";
        for (const auto& f : op.corner_features) {
            out << "# corner " << f.corner << ": "
                << (f.kind == CornerKind::fillet ? "fillet2D(" : "chamfer2D(") << num(f.param)
                << ") applied to the sketch of part" << i << "\n";
        }
        if (i == 0)
            out << "solid = part0\n";
        else if (op.role == BoolRole::boolean_cut)
            out << "solid = solid.cut(part" << i << ")\n";
        else
            out << "solid = solid.union(part" << i << ")\n";
    }
    if (program.ops.empty()) out << "solid = None\n";
    out << "\nshow_object(solid)\n";
    return out.str();
}

}  // namespace cadfit
