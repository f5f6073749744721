#include "cadfit/mesh.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

namespace cadfit {

namespace {

float read_f32(const char* p) {
    float f;
    std::memcpy(&f, p, 4);
    return f;
}

uint32_t read_u32(const char* p) {
    uint32_t v;
    std::memcpy(&v, p, 4);
    return v;
}

bool looks_ascii(const std::string& bytes) {
    // "solid" header alone is not enough: many binary exporters write it too.
    // Require a "facet" token in the first chunk of printable text.
    if (bytes.size() < 6 || bytes.compare(0, 5, "solid") != 0) return false;
    size_t probe = std::min<size_t>(bytes.size(), 2048);
    return bytes.substr(0, probe).find("facet") != std::string::npos;
}

TriMesh parse_binary(const std::string& bytes) {
    if (bytes.size() < 84) throw Error(ErrorKind::malformed_input, "binary STL truncated header");
    uint32_t n = read_u32(bytes.data() + 80);
    size_t expected = 84 + size_t(n) * 50;
    if (bytes.size() < expected)
        throw Error(ErrorKind::malformed_input,
                    "binary STL truncated: expected " + std::to_string(expected) + " bytes, got " +
                        std::to_string(bytes.size()));
    TriMesh mesh;
    mesh.vertices.reserve(size_t(n) * 3);
    mesh.faces.reserve(n);
    const char* p = bytes.data() + 84;
    for (uint32_t i = 0; i < n; ++i, p += 50) {
        int base = int(mesh.vertices.size());
        for (int v = 0; v < 3; ++v) {
            const char* q = p + 12 + v * 12; // skip the stored normal
            mesh.vertices.emplace_back(read_f32(q), read_f32(q + 4), read_f32(q + 8));
        }
        mesh.faces.push_back({base, base + 1, base + 2});
    }
    return mesh;
}

TriMesh parse_ascii(const std::string& bytes) {
    TriMesh mesh;
    std::istringstream in(bytes);
    std::string tok;
    std::vector<Vec3> tri;
    while (in >> tok) {
        if (tok == "vertex") {
            double x, y, z;
            if (!(in >> x >> y >> z))
                throw Error(ErrorKind::malformed_input, "ASCII STL: bad vertex line");
            tri.emplace_back(x, y, z);
        } else if (tok == "endfacet") {
            if (tri.size() != 3)
                throw Error(ErrorKind::malformed_input, "ASCII STL: facet without 3 vertices");
            int base = int(mesh.vertices.size());
            for (auto& v : tri) mesh.vertices.push_back(v);
            mesh.faces.push_back({base, base + 1, base + 2});
            tri.clear();
        }
    }
    if (!tri.empty()) throw Error(ErrorKind::malformed_input, "ASCII STL: unterminated facet");
    return mesh;
}

}  // namespace

TriMesh parse_stl(const std::string& bytes) {
    TriMesh raw = looks_ascii(bytes) ? parse_ascii(bytes) : parse_binary(bytes);
    for (const auto& v : raw.vertices)
        if (!v.allFinite()) throw Error(ErrorKind::malformed_input, "STL: non-finite coordinate");
    TriMesh mesh = weld_vertices(raw);
    if (mesh.faces.empty()) throw Error(ErrorKind::empty_mesh, "STL contains no faces");
    return mesh;
}

TriMesh load_mesh(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::io_error, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw Error(ErrorKind::io_error, "read failed for " + path);
    return parse_stl(buf.str());
}

void save_stl(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io_error, "cannot open " + path + " for writing");
    char header[80] = {};
    std::snprintf(header, sizeof(header), "cadfit");
    out.write(header, 80);
    uint32_t n = uint32_t(mesh.faces.size());
    out.write(reinterpret_cast<const char*>(&n), 4);
    for (size_t f = 0; f < mesh.faces.size(); ++f) {
        float buf[12];
        Vec3 nrm = mesh.face_normal(int(f));
        buf[0] = float(nrm.x());
        buf[1] = float(nrm.y());
        buf[2] = float(nrm.z());
        for (int v = 0; v < 3; ++v) {
            const Vec3& p = mesh.vertices[mesh.faces[f][v]];
            buf[3 + v * 3 + 0] = float(p.x());
            buf[3 + v * 3 + 1] = float(p.y());
            buf[3 + v * 3 + 2] = float(p.z());
        }
        out.write(reinterpret_cast<const char*>(buf), 48);
        uint16_t attr = 0;
        out.write(reinterpret_cast<const char*>(&attr), 2);
    }
    if (!out) throw Error(ErrorKind::io_error, "write failed for " + path);
}

}  // namespace cadfit
