#pragma once

#include "seqfit/body_model.hpp"
#include "seqfit/camera.hpp"
#include "seqfit/keypoints.hpp"
#include "seqfit/schedule.hpp"

#include <span>
#include <vector>

namespace seqfit {

constexpr double kDefaultGmofSigma = 100.0; // pixels

/// Geman-McClure robustifier: rho(e) = e^2 sigma^2 / (e^2 + sigma^2).
double gmof(double residual, double sigma);

/// d rho / d e.
double gmof_derivative(double residual, double sigma);

/// weight * sum of squares. Backs the shape, hand-pose and shared-shape
/// priors.
double l2_prior(std::span<const double> values, double weight);

/// Quadratic prior over the body-subtree joint rotations (root, hand and
/// jaw joints excluded). Substitute for a learned pose prior.
double body_pose_prior(const BodyModelSpec& spec, const PoseParams& pose, double weight);

/// Hand-subtree quadratic pose prior.
double hand_pose_prior(const BodyModelSpec& spec, const PoseParams& pose, double weight);

/// Per-axis weighted quadratic prior over the jaw joints.
double jaw_pose_prior(const BodyModelSpec& spec, const PoseParams& pose,
                      const std::array<double, 3>& axis_weights);

/// Exponential overbending prior: weight * sum over bend joints of
/// exp(sign * angle). At rest each hinge contributes exp(0) = 1.
double bending_prior(const BodyModelSpec& spec, const PoseParams& pose, double weight);

/// Stage weight applied to a keypoint by joint group (hand/face/body).
double keypoint_group_weight(const BodyModelSpec& spec, int joint, const StageWeights& weights);

/// Robustified, confidence- and gamma-weighted keypoint reprojection loss.
/// Keypoints map to model joints through frame.joint_map; per-keypoint
/// group weights (body/hand/face) come from the stage weights.
double reprojection_loss(const BodyModelSpec& spec, const ShapeParams& shape,
                         const PoseParams& pose, const CameraParams& camera,
                         const KeypointFrame& frame, const JointWeights& gamma,
                         const StageWeights& weights, double sigma = kDefaultGmofSigma);

/// Position-space core of the temporal-consistency loss for one frame:
/// w * sum_j || current_j - mean(prev_j, current_j, next_j) ||^2.
double temporal_consistency_cost(const std::vector<Vec3>& prev, const std::vector<Vec3>& current,
                                 const std::vector<Vec3>& next, double temporal_weight);

/// Temporal-consistency loss for frame `frame_index` (1-based) of a
/// sequence of `sequence_length` frames: poses the shared shape with each
/// of the three pose sets and applies the position-space core. Exactly 0
/// for the first and last frame of the sequence.
double temporal_loss(const BodyModelSpec& spec, const ShapeParams& shared_shape,
                     const PoseParams& prev, const PoseParams& current, const PoseParams& next,
                     double temporal_weight, int frame_index, int sequence_length);

/// Per-term breakdown of the single-frame objective.
struct FrameObjectiveTerms {
    double reprojection = 0.0;
    double body_pose = 0.0;
    double hand_pose = 0.0;
    double jaw_pose = 0.0;
    double bending = 0.0;
    double shape = 0.0;
    double expression = 0.0; // identically 0, slot retained
    double collision = 0.0;  // identically 0, slot retained

    double total() const {
        return reprojection + body_pose + hand_pose + jaw_pose + bending + shape + expression +
               collision;
    }
};

/// The single-frame objective: weighted reprojection plus all priors at
/// the given stage weights.
FrameObjectiveTerms frame_objective(const BodyModelSpec& spec, const ShapeParams& shape,
                                    const PoseParams& pose, const CameraParams& camera,
                                    const KeypointFrame& frame, const JointWeights& gamma,
                                    const StageWeights& weights,
                                    double sigma = kDefaultGmofSigma);

} // namespace seqfit
