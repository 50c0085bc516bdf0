#pragma once

#include "seqfit/geometry.hpp"

#include <array>
#include <string>
#include <vector>

namespace seqfit {

/// Triangle mesh with outward-oriented faces; `watertight` marks meshes
/// whose volume is meaningful (closed, consistently oriented surface,
/// possibly several components).
struct TriMesh {
    std::vector<Vec3> vertices;
    std::vector<std::array<int, 3>> faces;
    bool watertight = false;

    TriMesh translated(const Vec3& offset) const;
    TriMesh transformed(const Mat3& rotation, const Vec3& translation) const;
};

/// Signed volume via the divergence theorem: (1/6) sum over faces of
/// det[v0 v1 v2]. The absolute value is returned. Throws ValidationError
/// when the mesh is not flagged watertight.
double mesh_volume(const TriMesh& mesh);

/// Signed variant (orientation-sensitive), used to check face winding.
double mesh_volume_signed(const TriMesh& mesh);

/// Axis-aligned unit cube (12 triangles), corner at the origin.
TriMesh make_unit_cube();

/// Icosphere of the given radius, `subdivisions` rounds of 4-way splits.
TriMesh make_icosphere(double radius, int subdivisions);

/// Minimal Wavefront OBJ support: v/f records only.
void write_obj(const TriMesh& mesh, const std::string& path);
TriMesh read_obj(const std::string& path, bool watertight = true);

} // namespace seqfit
