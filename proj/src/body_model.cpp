#include "seqfit/body_model.hpp"

#include "seqfit/errors.hpp"

#include <cmath>
#include <sstream>

namespace seqfit {

int BodyModelSpec::joint_index(const std::string& joint_name) const {
    for (size_t i = 0; i < joint_names.size(); ++i)
        if (joint_names[i] == joint_name) return static_cast<int>(i);
    return -1;
}

bool BodyModelSpec::is_hand_joint(int joint) const {
    for (int j : hand_joints)
        if (j == joint) return true;
    return false;
}

bool BodyModelSpec::is_jaw_joint(int joint) const {
    for (int j : jaw_joints)
        if (j == joint) return true;
    return false;
}

void BodyModelSpec::validate() const {
    const int nj = joint_count();
    const int nv = vertex_count();
    if (nj == 0) throw ValidationError("model has no joints");
    if (static_cast<int>(joint_names.size()) != nj || static_cast<int>(parent.size()) != nj)
        throw ValidationError("joint_names/parent size does not match joint count");

    int roots = 0;
    for (int j = 0; j < nj; ++j) {
        if (parent[j] < 0) {
            ++roots;
            if (j != 0) throw ValidationError("root joint must be stored first");
        } else if (parent[j] >= j) {
            throw ValidationError("joints must be stored topologically (parent index < joint index)");
        }
    }
    if (roots != 1) throw ValidationError("kinematic tree must have exactly one root");

    if (static_cast<int>(joint_shape_basis.size()) != nj)
        throw ValidationError("joint_shape_basis size does not match joint count");
    for (const auto& basis : joint_shape_basis)
        if (static_cast<int>(basis.size()) != shape_dim)
            throw ValidationError("joint_shape_basis dimension does not match shape_dim");

    if (static_cast<int>(vertex_shape_basis.size()) != nv)
        throw ValidationError("vertex_shape_basis size does not match vertex count");
    for (const auto& basis : vertex_shape_basis)
        if (static_cast<int>(basis.size()) != shape_dim)
            throw ValidationError("vertex_shape_basis dimension does not match shape_dim");

    if (static_cast<int>(skin_weights.size()) != nv)
        throw ValidationError("skin_weights size does not match vertex count");
    for (int v = 0; v < nv; ++v) {
        double total = 0.0;
        for (const auto& [joint, w] : skin_weights[v]) {
            if (joint < 0 || joint >= nj)
                throw ValidationError("skin weight references invalid joint");
            if (w < 0.0) throw ValidationError("skin weights must be nonnegative");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-6) {
            std::ostringstream msg;
            msg << "skin weights of vertex " << v << " sum to " << total;
            throw ValidationError(msg.str());
        }
    }

    for (const auto& face : faces)
        for (int idx : face)
            if (idx < 0 || idx >= nv) throw ValidationError("face references invalid vertex");

    for (const auto& bend : bend_joints) {
        if (bend.joint <= 0 || bend.joint >= nj)
            throw ValidationError("bend joint index out of range");
        if (bend.axis < 0 || bend.axis > 2)
            throw ValidationError("bend joint axis out of range");
    }
    for (int j : hand_joints)
        if (j < 0 || j >= nj) throw ValidationError("hand joint index out of range");
    for (int j : jaw_joints)
        if (j < 0 || j >= nj) throw ValidationError("jaw joint index out of range");
}

namespace {

void check_shape(const BodyModelSpec& spec, const ShapeParams& shape) {
    if (shape.beta.size() != spec.shape_dim)
        throw ValidationError("shape dimension does not match model");
}

void check_pose(const BodyModelSpec& spec, const PoseParams& pose) {
    if (static_cast<int>(pose.joint_rotations.size()) != std::max(0, spec.joint_count() - 1))
        throw ValidationError("pose joint count does not match model");
}

} // namespace

std::vector<Vec3> regress_joints(const BodyModelSpec& spec, const ShapeParams& shape) {
    check_shape(spec, shape);
    const int nj = spec.joint_count();
    std::vector<Vec3> joints(nj);
    for (int j = 0; j < nj; ++j) {
        Vec3 p = spec.template_joints[j];
        for (int k = 0; k < spec.shape_dim; ++k)
            p += shape.beta[k] * spec.joint_shape_basis[j][k];
        joints[j] = p;
    }
    return joints;
}

FkResult forward_kinematics(const BodyModelSpec& spec, const ShapeParams& shape,
                            const PoseParams& pose) {
    check_pose(spec, pose);
    const std::vector<Vec3> rest = regress_joints(spec, shape);
    const int nj = spec.joint_count();

    FkResult out;
    out.joints.resize(nj);
    out.world_rotations.resize(nj);

    out.joints[0] = rest[0];
    out.world_rotations[0] = rodrigues(pose.root_rotation);
    for (int j = 1; j < nj; ++j) {
        const int par = spec.parent[j];
        const Vec3 offset = rest[j] - rest[par];
        out.joints[j] = out.joints[par] + out.world_rotations[par] * offset;
        out.world_rotations[j] = out.world_rotations[par] * rodrigues(pose.rotation_of(j));
    }
    return out;
}

FkResult forward_kinematics_with_jacobian(const BodyModelSpec& spec, const ShapeParams& shape,
                                          const PoseParams& pose, FkJacobian& jacobian) {
    check_pose(spec, pose);
    check_shape(spec, shape);
    const std::vector<Vec3> rest = regress_joints(spec, shape);
    const int nj = spec.joint_count();
    const int dim = spec.shape_dim;
    const int pose_cols = 3 * nj;

    FkResult out;
    out.joints.resize(nj);
    out.world_rotations.resize(nj);

    // Row block 3j of dw holds dW_j/dq for every pose column q (a 3x3
    // block per column). Only ancestor columns are ever nonzero; the
    // propagation walks all columns but stays cheap at these joint counts.
    MatX dw = MatX::Zero(3 * nj, 3 * pose_cols);
    jacobian.dpos = MatX::Zero(3 * nj, pose_cols + dim);
    MatX& dp = jacobian.dpos;

    std::vector<std::array<Mat3, 3>> local_jac(nj);
    std::vector<Mat3> local_rot(nj);
    local_rot[0] = rodrigues(pose.root_rotation);
    local_jac[0] = rodrigues_jacobian(pose.root_rotation);
    for (int j = 1; j < nj; ++j) {
        local_rot[j] = rodrigues(pose.rotation_of(j));
        local_jac[j] = rodrigues_jacobian(pose.rotation_of(j));
    }

    out.joints[0] = rest[0];
    out.world_rotations[0] = local_rot[0];
    for (int k = 0; k < 3; ++k)
        dw.block<3, 3>(0, 3 * k) = local_jac[0][k];
    for (int k = 0; k < dim; ++k)
        dp.block<3, 1>(0, pose_cols + k) = spec.joint_shape_basis[0][k];

    for (int j = 1; j < nj; ++j) {
        const int par = spec.parent[j];
        const Vec3 offset = rest[j] - rest[par];
        out.joints[j] = out.joints[par] + out.world_rotations[par] * offset;
        out.world_rotations[j] = out.world_rotations[par] * local_rot[j];

        // dW/dq is nonzero only for q on the path root..j.
        for (int anc = j; anc >= 0; anc = spec.parent[anc]) {
            for (int c = 0; c < 3; ++c) {
                const int q = 3 * anc + c;
                const Mat3 dw_par = dw.block<3, 3>(3 * par, 3 * q);
                dp.block<3, 1>(3 * j, q) = dp.block<3, 1>(3 * par, q) + dw_par * offset;
                Mat3 dw_j = dw_par * local_rot[j];
                if (anc == j) dw_j += out.world_rotations[par] * local_jac[j][c];
                dw.block<3, 3>(3 * j, 3 * q) = dw_j;
            }
        }
        for (int k = 0; k < dim; ++k) {
            const Vec3 doffset = spec.joint_shape_basis[j][k] - spec.joint_shape_basis[par][k];
            dp.block<3, 1>(3 * j, pose_cols + k) =
                dp.block<3, 1>(3 * par, pose_cols + k) + out.world_rotations[par] * doffset;
        }
    }
    return out;
}

std::vector<Vec3> regress_vertices(const BodyModelSpec& spec, const ShapeParams& shape) {
    check_shape(spec, shape);
    const int nv = spec.vertex_count();
    std::vector<Vec3> verts(nv);
    for (int v = 0; v < nv; ++v) {
        Vec3 p = spec.template_vertices[v];
        for (int k = 0; k < spec.shape_dim; ++k)
            p += shape.beta[k] * spec.vertex_shape_basis[v][k];
        verts[v] = p;
    }
    return verts;
}

std::vector<Vec3> skin_vertices(const BodyModelSpec& spec, const ShapeParams& shape,
                                const PoseParams& pose) {
    const std::vector<Vec3> rest_joints = regress_joints(spec, shape);
    const std::vector<Vec3> rest_verts = regress_vertices(spec, shape);
    const FkResult fk = forward_kinematics(spec, shape, pose);

    const int nv = spec.vertex_count();
    std::vector<Vec3> posed(nv, Vec3::Zero());
    for (int v = 0; v < nv; ++v) {
        for (const auto& [joint, w] : spec.skin_weights[v]) {
            const Vec3 local = rest_verts[v] - rest_joints[joint];
            posed[v] += w * (fk.joints[joint] + fk.world_rotations[joint] * local);
        }
    }
    return posed;
}

} // namespace seqfit
