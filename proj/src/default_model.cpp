#include "seqfit/default_model.hpp"

#include "seqfit/errors.hpp"

#include <cmath>
#include <functional>

namespace seqfit {

namespace {

struct JointDef {
    const char* name;
    int parent;
    Vec3 position;
};

// SMPL body joint layout, T-pose, y up, meters. Feet near y = 0.
const JointDef kBodyJoints[] = {
    {"pelvis", -1, {0.00, 0.95, 0.00}},
    {"left_hip", 0, {0.09, 0.91, 0.00}},
    {"right_hip", 0, {-0.09, 0.91, 0.00}},
    {"spine1", 0, {0.00, 1.05, 0.00}},
    {"left_knee", 1, {0.10, 0.50, 0.00}},
    {"right_knee", 2, {-0.10, 0.50, 0.00}},
    {"spine2", 3, {0.00, 1.15, 0.00}},
    {"left_ankle", 4, {0.11, 0.08, 0.00}},
    {"right_ankle", 5, {-0.11, 0.08, 0.00}},
    {"spine3", 6, {0.00, 1.25, 0.00}},
    {"left_foot", 7, {0.12, 0.02, 0.12}},
    {"right_foot", 8, {-0.12, 0.02, 0.12}},
    {"neck", 9, {0.00, 1.40, 0.00}},
    {"left_collar", 9, {0.05, 1.35, 0.00}},
    {"right_collar", 9, {-0.05, 1.35, 0.00}},
    {"head", 12, {0.00, 1.55, 0.00}},
    {"left_shoulder", 13, {0.17, 1.38, 0.00}},
    {"right_shoulder", 14, {-0.17, 1.38, 0.00}},
    {"left_elbow", 16, {0.45, 1.38, 0.00}},
    {"right_elbow", 17, {-0.45, 1.38, 0.00}},
    {"left_wrist", 18, {0.70, 1.38, 0.00}},
    {"right_wrist", 19, {-0.70, 1.38, 0.00}},
    {"left_hand", 20, {0.76, 1.38, 0.00}},
    {"right_hand", 21, {-0.76, 1.38, 0.00}},
};

struct BoneDef {
    int child; // capsule spans parent(child) -> child
    double radius;
};

const BoneDef kBodyBones[] = {
    {1, 0.070}, {2, 0.070}, {3, 0.110}, {4, 0.070}, {5, 0.070}, {6, 0.115},
    {7, 0.055}, {8, 0.055}, {9, 0.110}, {10, 0.040}, {11, 0.040}, {12, 0.055},
    {13, 0.050}, {14, 0.050}, {15, 0.090}, {16, 0.048}, {17, 0.048}, {18, 0.042},
    {19, 0.042}, {20, 0.036}, {21, 0.036}, {22, 0.032}, {23, 0.032},
};

// Appends a closed capsule from p0 to p1 bound rigidly to `joint`.
// 8 segments, two cap rings per end: 34 vertices, 64 triangles.
void append_capsule(BodyModelSpec& spec, const Vec3& p0, const Vec3& p1, double radius,
                    int joint) {
    Vec3 axis = p1 - p0;
    double length = axis.norm();
    Vec3 u = length > 1e-12 ? Vec3(axis / length) : Vec3(0, 1, 0);
    Vec3 v = u.cross(Vec3(1, 0, 0));
    if (v.squaredNorm() < 1e-8) v = u.cross(Vec3(0, 0, 1));
    v.normalize();
    const Vec3 w = u.cross(v);

    constexpr int kSegments = 8;
    const double cap_angles[] = {M_PI / 4.0, M_PI / 2.0};

    const int base = spec.vertex_count();
    std::vector<int> rings[4];
    auto add_ring = [&](const Vec3& center, double along, double out) {
        std::vector<int> ring;
        for (int s = 0; s < kSegments; ++s) {
            const double t = 2.0 * M_PI * s / kSegments;
            spec.template_vertices.push_back(center + along * u +
                                             out * (std::cos(t) * v + std::sin(t) * w));
            ring.push_back(static_cast<int>(spec.template_vertices.size()) - 1);
        }
        return ring;
    };

    spec.template_vertices.push_back(p0 - radius * u); // south pole
    const int south = base;
    rings[0] = add_ring(p0, -radius * std::cos(cap_angles[0]), radius * std::sin(cap_angles[0]));
    rings[1] = add_ring(p0, 0.0, radius);
    rings[2] = add_ring(p1, 0.0, radius);
    rings[3] = add_ring(p1, radius * std::cos(cap_angles[0]), radius * std::sin(cap_angles[0]));
    spec.template_vertices.push_back(p1 + radius * u); // north pole
    const int north = static_cast<int>(spec.template_vertices.size()) - 1;

    auto add_face = [&](int a, int b, int c) { spec.faces.push_back({a, b, c}); };
    for (int s = 0; s < kSegments; ++s) {
        const int sn = (s + 1) % kSegments;
        // Pole fans. Winding chosen so normals point away from the axis.
        add_face(south, rings[0][sn], rings[0][s]);
        add_face(north, rings[3][s], rings[3][sn]);
        for (int band = 0; band < 3; ++band) {
            const auto& lo = rings[band];
            const auto& hi = rings[band + 1];
            add_face(lo[s], lo[sn], hi[sn]);
            add_face(lo[s], hi[sn], hi[s]);
        }
    }

    const int count = static_cast<int>(spec.template_vertices.size()) - base;
    for (int i = 0; i < count; ++i)
        spec.skin_weights.push_back({{joint, 1.0}});
}

struct FingerDef {
    const char* name;
    double z;     // spread across the palm
    double scale; // relative finger length
};

const FingerDef kFingers[] = {
    {"thumb", 0.050, 0.8}, {"index", 0.025, 1.0}, {"middle", 0.000, 1.05},
    {"ring", -0.025, 1.0}, {"pinky", -0.050, 0.8},
};

void append_hand(BodyModelSpec& spec, int wrist, double side, std::vector<int>& hand_joints) {
    const Vec3 wrist_pos = spec.template_joints[wrist];
    const std::string prefix = side > 0 ? "left_" : "right_";
    for (const auto& finger : kFingers) {
        int parent = wrist;
        const double seg_lengths[] = {0.035, 0.025, 0.020};
        double along = 0.04;
        for (int seg = 0; seg < 3; ++seg) {
            along += seg_lengths[seg] * finger.scale;
            spec.joint_names.push_back(prefix + finger.name + std::to_string(seg + 1));
            spec.parent.push_back(parent);
            spec.template_joints.push_back(wrist_pos + Vec3(side * along, 0.0, finger.z));
            parent = spec.joint_count() - 1;
            hand_joints.push_back(parent);
        }
    }
}

// Smooth in-plane deformation fields; q is the position relative to the
// skeleton centroid, h the body height scale.
std::vector<std::function<Vec3(const Vec3&)>> basis_fields(double h) {
    auto upper = [](double y) { return 0.5 * (y + std::abs(y)); };
    auto lower = [](double y) { return 0.5 * (std::abs(y) - y); };
    return {
        [](const Vec3& q) { return Vec3(q.x(), 0, 0); },
        [](const Vec3& q) { return Vec3(0, q.y(), 0); },
        [h](const Vec3& q) { return Vec3(q.x() * q.y() / h, 0, 0); },
        [h](const Vec3& q) { return Vec3(0, q.y() * std::abs(q.y()) / h, 0); },
        [upper](const Vec3& q) { return Vec3(0, upper(q.y()), 0); },
        [h, upper](const Vec3& q) { return Vec3(upper(q.y()) * q.x() / h, 0, 0); },
        [](const Vec3& q) { return Vec3(0, 0.8 * std::abs(q.x()), 0); },
        [h, lower](const Vec3& q) { return Vec3(lower(q.y()) * q.x() / h, 0, 0); },
        [lower](const Vec3& q) { return Vec3(0, -lower(q.y()), 0); },
        [h](const Vec3& q) { return Vec3(q.x() * std::abs(q.x()) / h, 0, 0); },
    };
}

} // namespace

BodyModelSpec default_model(bool with_hands_and_jaw) {
    BodyModelSpec spec;
    spec.name = with_hands_and_jaw ? "seqfit-humanoid-full" : "seqfit-humanoid-body";
    spec.shape_dim = 10;
    spec.watertight = true;

    for (const auto& def : kBodyJoints) {
        spec.joint_names.push_back(def.name);
        spec.parent.push_back(def.parent);
        spec.template_joints.push_back(def.position);
    }

    if (with_hands_and_jaw) {
        append_hand(spec, spec.joint_index("left_wrist"), +1.0, spec.hand_joints);
        append_hand(spec, spec.joint_index("right_wrist"), -1.0, spec.hand_joints);
        spec.joint_names.push_back("jaw");
        spec.parent.push_back(spec.joint_index("head"));
        spec.template_joints.push_back(Vec3(0.0, 1.60, 0.06));
        spec.jaw_joints.push_back(spec.joint_count() - 1);
    }

    // Hinges: knees flex about +x, elbows about -/+y depending on side.
    spec.bend_joints = {
        {spec.joint_index("left_knee"), 0, -1.0},
        {spec.joint_index("right_knee"), 0, -1.0},
        {spec.joint_index("left_elbow"), 1, 1.0},
        {spec.joint_index("right_elbow"), 1, -1.0},
    };

    // Surface: one rigid capsule per body bone.
    for (const auto& bone : kBodyBones) {
        const int child = bone.child;
        const int parent = spec.parent[child];
        append_capsule(spec, spec.template_joints[parent], spec.template_joints[child],
                       bone.radius, parent);
    }

    // Shape basis: evaluate the fields at joints and vertices, project the
    // joint-space components off the rigid + scale gauge directions, and
    // orthonormalize so every component is independently observable from
    // keypoints. The identical field combinations are applied to the
    // vertex basis to keep surface and skeleton consistent.
    const int nj = spec.joint_count();
    const int nv = spec.vertex_count();
    Vec3 centroid = Vec3::Zero();
    for (const auto& p : spec.template_joints) centroid += p;
    centroid /= static_cast<double>(nj);
    const double height = 1.75;

    // Gauge fields (translations, infinitesimal rotations about the
    // centroid, uniform scale) go first; the shape fields follow.
    std::vector<std::function<Vec3(const Vec3&)>> columns = {
        [](const Vec3&) { return Vec3(1, 0, 0); },
        [](const Vec3&) { return Vec3(0, 1, 0); },
        [](const Vec3&) { return Vec3(0, 0, 1); },
        [](const Vec3& q) { return Vec3(0, -q.z(), q.y()); },
        [](const Vec3& q) { return Vec3(q.z(), 0, -q.x()); },
        [](const Vec3& q) { return Vec3(-q.y(), q.x(), 0); },
        [](const Vec3& q) { return q; },
    };
    constexpr int kGauge = 7;
    for (auto& field : basis_fields(height)) columns.push_back(std::move(field));
    const int total = static_cast<int>(columns.size());
    const int dim = total - kGauge;

    MatX joint_fields(3 * nj, total), vertex_fields(3 * nv, total);
    for (int k = 0; k < total; ++k) {
        for (int j = 0; j < nj; ++j)
            joint_fields.block<3, 1>(3 * j, k) = columns[k](spec.template_joints[j] - centroid);
        for (int v = 0; v < nv; ++v)
            vertex_fields.block<3, 1>(3 * v, k) = columns[k](spec.template_vertices[v] - centroid);
    }

    // Mirrored Gram-Schmidt: inner products live in joint space, every
    // elementary operation is replayed on the vertex evaluations. Shape
    // columns end up orthogonal to the gauge and to each other.
    const double target_rms = 0.025 * std::sqrt(3.0 * nj); // 2.5 cm rms per unit beta
    for (int k = 0; k < total; ++k) {
        for (int prev = 0; prev < k; ++prev) {
            const double c = joint_fields.col(prev).dot(joint_fields.col(k));
            joint_fields.col(k) -= c * joint_fields.col(prev);
            vertex_fields.col(k) -= c * vertex_fields.col(prev);
        }
        const double norm = joint_fields.col(k).norm();
        if (norm < 1e-9) throw ValidationError("default model: degenerate shape basis");
        joint_fields.col(k) /= norm;
        vertex_fields.col(k) /= norm;
    }
    joint_fields = (target_rms * joint_fields.rightCols(dim)).eval();
    vertex_fields = (target_rms * vertex_fields.rightCols(dim)).eval();

    spec.joint_shape_basis.assign(nj, std::vector<Vec3>(dim));
    for (int j = 0; j < nj; ++j)
        for (int k = 0; k < dim; ++k)
            spec.joint_shape_basis[j][k] = joint_fields.block<3, 1>(3 * j, k);
    spec.vertex_shape_basis.assign(nv, std::vector<Vec3>(dim));
    for (int v = 0; v < nv; ++v)
        for (int k = 0; k < dim; ++k)
            spec.vertex_shape_basis[v][k] = vertex_fields.block<3, 1>(3 * v, k);

    spec.validate();
    return spec;
}

} // namespace seqfit
