#pragma once

#include "seqfit/geometry.hpp"

#include <string>
#include <utility>
#include <vector>

namespace seqfit {

/// Parametric skinned body model: a kinematic tree with a linear shape
/// basis on both joints and surface vertices, deformed by linear blend
/// skinning. Joints are stored topologically: index 0 is the root and
/// every joint's parent has a smaller index.
struct BodyModelSpec {
    struct BendJoint {
        int joint = -1;
        int axis = 0;      // 0..2, axis-angle component with the hinge
        double sign = 1.0; // +1/-1 so that hyperextension grows exp(sign * angle)
    };

    std::string name;
    std::vector<std::string> joint_names;
    std::vector<int> parent; // -1 for the root
    std::vector<Vec3> template_joints;
    std::vector<std::vector<Vec3>> joint_shape_basis; // [joint][shape_dim]
    std::vector<Vec3> template_vertices;
    std::vector<std::array<int, 3>> faces; // ccw outward
    std::vector<std::vector<std::pair<int, double>>> skin_weights; // [vertex] -> (joint, w)
    std::vector<std::vector<Vec3>> vertex_shape_basis; // [vertex][shape_dim]
    std::vector<BendJoint> bend_joints;
    std::vector<int> hand_joints;
    std::vector<int> jaw_joints;
    bool watertight = false;
    int shape_dim = 10;

    int joint_count() const { return static_cast<int>(template_joints.size()); }
    int vertex_count() const { return static_cast<int>(template_vertices.size()); }

    int joint_index(const std::string& joint_name) const; // -1 if absent
    bool is_hand_joint(int joint) const;
    bool is_jaw_joint(int joint) const;

    /// Checks the structural invariants (single-rooted topological tree,
    /// normalized skin weights, valid face indices, consistent basis
    /// dimensions). Throws ValidationError on violation.
    void validate() const;
};

struct ShapeParams {
    VecX beta;

    static ShapeParams zeros(int dim) {
        ShapeParams s;
        s.beta = VecX::Zero(dim);
        return s;
    }
};

struct PoseParams {
    Vec3 root_rotation = Vec3::Zero();
    std::vector<Vec3> joint_rotations; // joint j>0 uses joint_rotations[j-1]

    static PoseParams rest(int joint_count) {
        PoseParams p;
        p.joint_rotations.assign(std::max(0, joint_count - 1), Vec3::Zero());
        return p;
    }

    const Vec3& rotation_of(int joint) const {
        return joint == 0 ? root_rotation : joint_rotations[joint - 1];
    }
    Vec3& rotation_of(int joint) {
        return joint == 0 ? root_rotation : joint_rotations[joint - 1];
    }
};

struct PosedJoints {
    std::vector<Vec3> positions;
};

struct FkResult {
    std::vector<Vec3> joints;
    std::vector<Mat3> world_rotations;
};

/// Jacobian of the forward-kinematics joint positions. Column layout:
/// [root rotation (3) | joint rotations 1..J-1 (3 each) | shape (D)],
/// rows are 3 per joint in joint order.
struct FkJacobian {
    MatX dpos; // (3J) x (3J + D)

    int pose_cols(int joint_count) const { return 3 * joint_count; }
};

/// Rest-pose joint positions under the shape parameters:
/// template_joints[j] + sum_k beta_k * joint_shape_basis[j][k].
std::vector<Vec3> regress_joints(const BodyModelSpec& spec, const ShapeParams& shape);

/// Poses the shaped skeleton along the kinematic chain. The root keeps
/// its rest position and applies root_rotation; every child composes the
/// parent's world rotation with its own local rotation.
FkResult forward_kinematics(const BodyModelSpec& spec, const ShapeParams& shape,
                            const PoseParams& pose);

/// forward_kinematics plus the exact Jacobian of all joint positions with
/// respect to pose and shape parameters.
FkResult forward_kinematics_with_jacobian(const BodyModelSpec& spec, const ShapeParams& shape,
                                          const PoseParams& pose, FkJacobian& jacobian);

/// Linear-blend-skinned surface vertices of the shaped, posed model.
std::vector<Vec3> skin_vertices(const BodyModelSpec& spec, const ShapeParams& shape,
                                const PoseParams& pose);

/// Rest-pose vertices under the shape parameters (no skinning).
std::vector<Vec3> regress_vertices(const BodyModelSpec& spec, const ShapeParams& shape);

} // namespace seqfit
