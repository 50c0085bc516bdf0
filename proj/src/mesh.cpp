#include "seqfit/mesh.hpp"

#include "seqfit/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace seqfit {

TriMesh TriMesh::translated(const Vec3& offset) const {
    TriMesh out = *this;
    for (auto& v : out.vertices) v += offset;
    return out;
}

TriMesh TriMesh::transformed(const Mat3& rotation, const Vec3& translation) const {
    TriMesh out = *this;
    for (auto& v : out.vertices) v = rotation * v + translation;
    return out;
}

double mesh_volume_signed(const TriMesh& mesh) {
    double total = 0.0;
    for (const auto& f : mesh.faces) {
        const Vec3& a = mesh.vertices[f[0]];
        const Vec3& b = mesh.vertices[f[1]];
        const Vec3& c = mesh.vertices[f[2]];
        total += a.dot(b.cross(c));
    }
    return total / 6.0;
}

double mesh_volume(const TriMesh& mesh) {
    if (!mesh.watertight)
        throw ValidationError("mesh volume unavailable: mesh not flagged watertight");
    return std::abs(mesh_volume_signed(mesh));
}

TriMesh make_unit_cube() {
    TriMesh m;
    m.watertight = true;
    for (int i = 0; i < 8; ++i)
        m.vertices.push_back(Vec3(i & 1, (i >> 1) & 1, (i >> 2) & 1));
    // Outward CCW faces per side.
    const int quads[6][4] = {
        {0, 2, 3, 1}, // z = 0
        {4, 5, 7, 6}, // z = 1
        {0, 1, 5, 4}, // y = 0
        {2, 6, 7, 3}, // y = 1
        {0, 4, 6, 2}, // x = 0
        {1, 3, 7, 5}, // x = 1
    };
    for (const auto& q : quads) {
        m.faces.push_back({q[0], q[1], q[2]});
        m.faces.push_back({q[0], q[2], q[3]});
    }
    return m;
}

TriMesh make_icosphere(double radius, int subdivisions) {
    const double t = (1.0 + std::sqrt(5.0)) / 2.0;
    std::vector<Vec3> verts = {
        {-1, t, 0}, {1, t, 0}, {-1, -t, 0}, {1, -t, 0}, {0, -1, t}, {0, 1, t},
        {0, -1, -t}, {0, 1, -t}, {t, 0, -1}, {t, 0, 1}, {-t, 0, -1}, {-t, 0, 1},
    };
    std::vector<std::array<int, 3>> faces = {
        {0, 11, 5}, {0, 5, 1}, {0, 1, 7}, {0, 7, 10}, {0, 10, 11},
        {1, 5, 9}, {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
        {3, 9, 4}, {3, 4, 2}, {3, 2, 6}, {3, 6, 8}, {3, 8, 9},
        {4, 9, 5}, {2, 4, 11}, {6, 2, 10}, {8, 6, 7}, {9, 8, 1},
    };
    for (auto& v : verts) v.normalize();

    for (int round = 0; round < subdivisions; ++round) {
        std::map<std::pair<int, int>, int> midpoints;
        auto midpoint = [&](int a, int b) {
            const auto key = std::minmax(a, b);
            auto it = midpoints.find(key);
            if (it != midpoints.end()) return it->second;
            Vec3 m = (verts[a] + verts[b]).normalized();
            verts.push_back(m);
            const int idx = static_cast<int>(verts.size()) - 1;
            midpoints.emplace(key, idx);
            return idx;
        };
        std::vector<std::array<int, 3>> next;
        next.reserve(faces.size() * 4);
        for (const auto& f : faces) {
            const int ab = midpoint(f[0], f[1]);
            const int bc = midpoint(f[1], f[2]);
            const int ca = midpoint(f[2], f[0]);
            next.push_back({f[0], ab, ca});
            next.push_back({f[1], bc, ab});
            next.push_back({f[2], ca, bc});
            next.push_back({ab, bc, ca});
        }
        faces = std::move(next);
    }

    TriMesh m;
    m.watertight = true;
    m.faces = std::move(faces);
    m.vertices.reserve(verts.size());
    for (const auto& v : verts) m.vertices.push_back(radius * v);
    return m;
}

void write_obj(const TriMesh& mesh, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    char line[128];
    for (const auto& v : mesh.vertices) {
        std::snprintf(line, sizeof(line), "v %.17g %.17g %.17g\n", v.x(), v.y(), v.z());
        out << line;
    }
    for (const auto& f : mesh.faces)
        out << "f " << f[0] + 1 << ' ' << f[1] + 1 << ' ' << f[2] + 1 << '\n';
    if (!out) throw IoError("write failed: " + path);
}

TriMesh read_obj(const std::string& path, bool watertight) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    TriMesh mesh;
    mesh.watertight = watertight;
    std::string line;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "v") {
            Vec3 v;
            ss >> v.x() >> v.y() >> v.z();
            mesh.vertices.push_back(v);
        } else if (tag == "f") {
            std::array<int, 3> f{};
            for (int i = 0; i < 3; ++i) {
                std::string token;
                ss >> token;
                // Accept "idx", "idx/..." forms.
                f[i] = std::stoi(token) - 1;
            }
            mesh.faces.push_back(f);
        }
    }
    for (const auto& f : mesh.faces)
        for (int idx : f)
            if (idx < 0 || idx >= static_cast<int>(mesh.vertices.size()))
                throw ValidationError("obj face references missing vertex: " + path);
    return mesh;
}

} // namespace seqfit
