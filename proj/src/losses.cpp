#include "seqfit/losses.hpp"

#include "seqfit/errors.hpp"

#include <cmath>

namespace seqfit {

double gmof(double residual, double sigma) {
    const double e2 = residual * residual;
    const double s2 = sigma * sigma;
    return e2 * s2 / (e2 + s2);
}

double gmof_derivative(double residual, double sigma) {
    const double e2 = residual * residual;
    const double s2 = sigma * sigma;
    const double denom = e2 + s2;
    return 2.0 * residual * s2 * s2 / (denom * denom);
}

double l2_prior(std::span<const double> values, double weight) {
    double total = 0.0;
    for (double x : values) total += x * x;
    return weight * total;
}

namespace {

bool in_list(const std::vector<int>& list, int joint) {
    for (int j : list)
        if (j == joint) return true;
    return false;
}

} // namespace

double body_pose_prior(const BodyModelSpec& spec, const PoseParams& pose, double weight) {
    double total = 0.0;
    for (int j = 1; j < spec.joint_count(); ++j) {
        if (in_list(spec.hand_joints, j) || in_list(spec.jaw_joints, j)) continue;
        total += pose.rotation_of(j).squaredNorm();
    }
    return weight * total;
}

double hand_pose_prior(const BodyModelSpec& spec, const PoseParams& pose, double weight) {
    double total = 0.0;
    for (int j : spec.hand_joints) total += pose.rotation_of(j).squaredNorm();
    return weight * total;
}

double jaw_pose_prior(const BodyModelSpec& spec, const PoseParams& pose,
                      const std::array<double, 3>& axis_weights) {
    double total = 0.0;
    for (int j : spec.jaw_joints) {
        const Vec3& r = pose.rotation_of(j);
        for (int axis = 0; axis < 3; ++axis) total += axis_weights[axis] * r[axis] * r[axis];
    }
    return total;
}

double bending_prior(const BodyModelSpec& spec, const PoseParams& pose, double weight) {
    double total = 0.0;
    for (const auto& bend : spec.bend_joints)
        total += std::exp(bend.sign * pose.rotation_of(bend.joint)[bend.axis]);
    return weight * total;
}

double keypoint_group_weight(const BodyModelSpec& spec, int joint, const StageWeights& weights) {
    if (spec.is_hand_joint(joint)) return weights.kp_hand;
    if (spec.is_jaw_joint(joint)) return weights.kp_face;
    return weights.kp_body;
}

double reprojection_loss(const BodyModelSpec& spec, const ShapeParams& shape,
                         const PoseParams& pose, const CameraParams& camera,
                         const KeypointFrame& frame, const JointWeights& gamma,
                         const StageWeights& weights, double sigma) {
    const FkResult fk = forward_kinematics(spec, shape, pose);
    double total = 0.0;
    for (int k = 0; k < frame.size(); ++k) {
        const double omega = frame.confidence[k];
        if (omega <= 0.0) continue;
        const int joint = frame.joint_map[k];
        const double lambda = keypoint_group_weight(spec, joint, weights);
        if (lambda <= 0.0) continue;
        const double g = gamma.gamma[joint] * weights.gamma_scale;
        if (g <= 0.0) continue;

        Vec2 pixel;
        if (!project_point(camera, fk.joints[joint], pixel))
            throw ValidationError("degenerate projection in reprojection loss");
        const Vec2 residual = pixel - frame.points[k];
        total += lambda * g * omega * (gmof(residual.x(), sigma) + gmof(residual.y(), sigma));
    }
    return total;
}

double temporal_consistency_cost(const std::vector<Vec3>& prev, const std::vector<Vec3>& current,
                                 const std::vector<Vec3>& next, double temporal_weight) {
    if (prev.size() != current.size() || next.size() != current.size())
        throw ValidationError("temporal cost: joint counts differ across frames");
    double total = 0.0;
    for (size_t j = 0; j < current.size(); ++j) {
        const Vec3 mean = (prev[j] + current[j] + next[j]) / 3.0;
        total += (current[j] - mean).squaredNorm();
    }
    return temporal_weight * total;
}

double temporal_loss(const BodyModelSpec& spec, const ShapeParams& shared_shape,
                     const PoseParams& prev, const PoseParams& current, const PoseParams& next,
                     double temporal_weight, int frame_index, int sequence_length) {
    if (frame_index < 1 || frame_index > sequence_length)
        throw ValidationError("temporal loss: frame index out of range");
    if (frame_index == 1 || frame_index == sequence_length) return 0.0;

    const FkResult fk_prev = forward_kinematics(spec, shared_shape, prev);
    const FkResult fk_cur = forward_kinematics(spec, shared_shape, current);
    const FkResult fk_next = forward_kinematics(spec, shared_shape, next);
    return temporal_consistency_cost(fk_prev.joints, fk_cur.joints, fk_next.joints,
                                     temporal_weight);
}

FrameObjectiveTerms frame_objective(const BodyModelSpec& spec, const ShapeParams& shape,
                                    const PoseParams& pose, const CameraParams& camera,
                                    const KeypointFrame& frame, const JointWeights& gamma,
                                    const StageWeights& weights, double sigma) {
    FrameObjectiveTerms terms;
    terms.reprojection = reprojection_loss(spec, shape, pose, camera, frame, gamma, weights, sigma);
    terms.body_pose = body_pose_prior(spec, pose, weights.body_pose_prior);
    terms.hand_pose = hand_pose_prior(spec, pose, weights.hand_pose_prior);
    terms.jaw_pose = jaw_pose_prior(spec, pose, weights.jaw_pose_prior);
    terms.bending = bending_prior(spec, pose, weights.bending_prior);
    terms.shape = l2_prior(std::span<const double>(shape.beta.data(),
                                                   static_cast<size_t>(shape.beta.size())),
                           weights.shape_prior);
    terms.expression = 0.0;
    terms.collision = 0.0;
    return terms;
}

} // namespace seqfit
