#include "seqfit/schedule.hpp"

namespace seqfit {

StageSchedule StageSchedule::defaults() {
    StageSchedule s;
    const std::array<double, 5> body_pose = {404.0, 404.0, 57.4, 4.8, 4.8};
    const std::array<double, 5> hand_pose = {404.0, 404.0, 57.4, 4.8, 4.8};
    const std::array<double, 5> shape = {100.0, 50.0, 10.0, 5.0, 5.0};
    const std::array<double, 5> expression = {100.0, 50.0, 10.0, 5.0, 5.0};
    const std::array<double, 5> jaw1 = {63.6, 63.6, 24.0, 6.9, 6.9};
    const std::array<double, 5> jaw2 = {201.0, 201.0, 75.7, 21.9, 21.9};
    const std::array<double, 5> jaw3 = {201.0, 201.0, 75.8, 21.9, 21.9};
    const std::array<double, 5> bending = {35.8, 35.8, 13.5, 3.9, 3.9};
    const std::array<double, 5> collision = {0.0, 0.0, 0.0, 0.1, 1.0};
    const std::array<double, 5> kp_hand = {0.0, 0.0, 0.0, 0.1, 2.0};
    const std::array<double, 5> kp_face = {0.0, 0.0, 0.0, 0.0, 2.0};
    const std::array<double, 5> kp_body = {1.0, 1.0, 1.0, 1.0, 1.0};

    for (int i = 0; i < kStageCount; ++i) {
        StageWeights& w = s.stages[i];
        w.body_pose_prior = body_pose[i];
        w.hand_pose_prior = hand_pose[i];
        w.shape_prior = shape[i];
        w.expression_prior = expression[i];
        w.jaw_pose_prior = {jaw1[i], jaw2[i], jaw3[i]};
        w.bending_prior = bending[i];
        w.collision_loss = collision[i];
        w.kp_hand = kp_hand[i];
        w.kp_face = kp_face[i];
        w.kp_body = kp_body[i];
        w.gamma_scale = 1.0;
        s.shared_shape_prior[i] = shape[i];
    }
    s.temporal_weight = 100.0;
    return s;
}

} // namespace seqfit
