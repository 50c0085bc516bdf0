#pragma once

#include <array>
#include <cstddef>

namespace seqfit {

/// Loss weights for one of the five optimization stages. The expression
/// and collision slots are carried for schedule-file fidelity; both terms
/// evaluate to zero in this implementation.
struct StageWeights {
    double body_pose_prior = 0.0;
    double hand_pose_prior = 0.0;
    double shape_prior = 0.0;
    double expression_prior = 0.0;            // unused slot
    std::array<double, 3> jaw_pose_prior{};   // per-axis weights
    double bending_prior = 0.0;
    double collision_loss = 0.0;              // unused slot
    double kp_hand = 0.0;
    double kp_face = 0.0;
    double kp_body = 0.0;
    double gamma_scale = 1.0; // per-stage multiplier on the per-joint gamma weights
};

/// The five-stage annealing schedule plus the temporal-consistency weight
/// and the per-stage shared-shape prior weight.
struct StageSchedule {
    static constexpr int kStageCount = 5;

    std::array<StageWeights, kStageCount> stages;
    double temporal_weight = 100.0;
    std::array<double, kStageCount> shared_shape_prior{};

    const StageWeights& stage(int index) const { return stages.at(static_cast<size_t>(index)); }

    /// The SMPLify-X weight table; shared_shape_prior mirrors the shape
    /// prior column and temporal_weight defaults to 100.
    static StageSchedule defaults();
};

} // namespace seqfit
