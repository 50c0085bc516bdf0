#pragma once

#include "seqfit/mesh.hpp"

#include <vector>

namespace seqfit {

/// Closest point on a triangle (a, b, c) to p.
Vec3 closest_point_on_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c);

/// Binary AABB hierarchy over mesh faces; leaves keep at most 4 faces.
/// Supports exact closest-point-on-surface queries by branch and bound.
class AabbTree {
  public:
    explicit AabbTree(const TriMesh& mesh);

    struct Hit {
        Vec3 point;      // closest point on the surface
        double distance; // euclidean
        int face;        // face index of the hit
    };

    Hit closest_point(const Vec3& query) const;

    int node_count() const { return static_cast<int>(nodes_.size()); }

  private:
    struct Node {
        Vec3 box_min, box_max;
        int left = -1, right = -1; // children, or -1 for leaves
        int first_face = 0, face_count = 0;
    };

    int build(std::vector<int>& faces, int begin, int end);
    double box_distance2(const Node& node, const Vec3& p) const;
    void search(int node, const Vec3& query, Hit& best) const;

    const TriMesh& mesh_;
    std::vector<Node> nodes_;
    std::vector<int> face_order_;
    std::vector<Vec3> centroids_;
};

} // namespace seqfit
