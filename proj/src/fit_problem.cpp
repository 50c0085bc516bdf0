#include "seqfit/fit_problem.hpp"

#include "seqfit/errors.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace seqfit {

SequenceFitProblem::SequenceFitProblem(const BodyModelSpec& spec,
                                       std::vector<const KeypointFrame*> frames,
                                       std::vector<int> sequence_indices, int sequence_length,
                                       const CameraParams& intrinsics,
                                       const StageSchedule& schedule, const JointWeights& gamma,
                                       Options options)
    : spec_(spec),
      frames_(std::move(frames)),
      sequence_indices_(std::move(sequence_indices)),
      sequence_length_(sequence_length),
      intrinsics_(intrinsics),
      schedule_(schedule),
      gamma_(gamma),
      options_(std::move(options)) {
    if (frames_.empty()) throw ValidationError("fit problem needs at least one frame");
    if (frames_.size() != sequence_indices_.size())
        throw ValidationError("fit problem: frame/index count mismatch");
    if (static_cast<int>(gamma_.gamma.size()) != spec_.joint_count())
        throw ValidationError("fit problem: gamma size does not match joint count");
    stage_objectives_.reserve(StageSchedule::kStageCount);
    for (int s = 0; s < StageSchedule::kStageCount; ++s) stage_objectives_.emplace_back(*this, s);
}

int SequenceFitProblem::frame_offset(int local_frame) const {
    const int per_frame = 3 * spec_.joint_count() + 3;
    return spec_.shape_dim + local_frame * per_frame;
}

int SequenceFitProblem::camera_offset(int local_frame) const {
    return frame_offset(local_frame) + 3 * spec_.joint_count();
}

ParamBlock SequenceFitProblem::make_block(const ShapeParams& shape,
                                          const std::vector<PoseParams>& poses,
                                          const std::vector<Vec3>& camera_translations) const {
    const int nf = frame_count();
    if (static_cast<int>(poses.size()) != nf || static_cast<int>(camera_translations.size()) != nf)
        throw ValidationError("fit problem: init parameter count mismatch");

    ParamBlock block;
    auto& shape_seg = block.add_segment("shape", ParamBlock::Kind::Shape, -1, spec_.shape_dim);
    shape_seg.frozen = options_.freeze_shape;
    for (int f = 0; f < nf; ++f) {
        block.add_segment("root", ParamBlock::Kind::RootRotation, f, 3);
        block.add_segment("pose", ParamBlock::Kind::JointRotations, f,
                          3 * (spec_.joint_count() - 1));
        block.add_segment("camera", ParamBlock::Kind::CameraTranslation, f, 3);
    }
    block.validate();

    block.values.segment(0, spec_.shape_dim) = shape.beta;
    for (int f = 0; f < nf; ++f) {
        const int fo = frame_offset(f);
        block.values.segment<3>(fo) = poses[f].root_rotation;
        for (int j = 1; j < spec_.joint_count(); ++j)
            block.values.segment<3>(fo + 3 * j) = poses[f].joint_rotations[j - 1];
        block.values.segment<3>(camera_offset(f)) = camera_translations[f];
    }
    block.set_bounds(block.segments[0], -10.0, 10.0); // |beta_k| <= 10
    return block;
}

void SequenceFitProblem::read_block(const ParamBlock& block, ShapeParams& shape,
                                    std::vector<PoseParams>& poses,
                                    std::vector<Vec3>& camera_translations) const {
    const int nf = frame_count();
    shape.beta = block.values.segment(0, spec_.shape_dim);
    poses.assign(nf, PoseParams::rest(spec_.joint_count()));
    camera_translations.assign(nf, Vec3::Zero());
    for (int f = 0; f < nf; ++f) {
        const int fo = frame_offset(f);
        poses[f].root_rotation = block.values.segment<3>(fo);
        for (int j = 1; j < spec_.joint_count(); ++j)
            poses[f].joint_rotations[j - 1] = block.values.segment<3>(fo + 3 * j);
        camera_translations[f] = block.values.segment<3>(camera_offset(f));
    }
}

namespace {

bool temporal_active(int local, int local_count, int seq_index, int seq_length, bool have_context) {
    if (seq_index <= 0 || seq_index >= seq_length - 1) return false; // sequence boundary
    if (local == local_count - 1) return false;                     // window's last frame
    if (local == 0 && !have_context) return false;
    return true;
}

} // namespace

double SequenceFitProblem::evaluate(const VecX& x, VecX* gradient, int stage) const {
    const StageWeights& w = schedule_.stage(stage);
    const int nj = spec_.joint_count();
    const int dim = spec_.shape_dim;
    const int nf = frame_count();
    const int pose_cols = 3 * nj;
    const double sum_scale = 1.0 / static_cast<double>(nf);

    if (gradient) gradient->setZero(x.size());
    if (!x.allFinite()) return std::numeric_limits<double>::infinity();

    ShapeParams shape;
    shape.beta = x.segment(0, dim);

    // Per-frame forward kinematics (with Jacobians when differentiating),
    // shared between the data term and the temporal term.
    std::vector<FkResult> fk(nf);
    std::vector<FkJacobian> jac(gradient ? nf : 0);
    std::vector<VecX> dpos_accum; // dLoss/d(joint positions), 3J per frame
    if (gradient) dpos_accum.assign(nf, VecX::Zero(3 * nj));

    PoseParams pose = PoseParams::rest(nj);
    std::vector<CameraParams> cameras(nf, intrinsics_);

    double total = 0.0;
    for (int f = 0; f < nf; ++f) {
        const int fo = frame_offset(f);
        pose.root_rotation = x.segment<3>(fo);
        for (int j = 1; j < nj; ++j) pose.joint_rotations[j - 1] = x.segment<3>(fo + 3 * j);
        cameras[f].translation = x.segment<3>(camera_offset(f));

        if (gradient)
            fk[f] = forward_kinematics_with_jacobian(spec_, shape, pose, jac[f]);
        else
            fk[f] = forward_kinematics(spec_, shape, pose);

        // Data term.
        if (frames_[f]) {
            const KeypointFrame& kp = *frames_[f];
            for (int k = 0; k < kp.size(); ++k) {
                const double omega = kp.confidence[k];
                if (omega <= 0.0) continue;
                const int joint = kp.joint_map[k];
                const double lambda = keypoint_group_weight(spec_, joint, w);
                const double g = gamma_.gamma[joint] * w.gamma_scale;
                const double scale = sum_scale * lambda * g * omega;
                if (scale <= 0.0) continue;

                Vec2 pixel;
                if (!project_point(cameras[f], fk[f].joints[joint], pixel))
                    return std::numeric_limits<double>::infinity();
                const Vec2 residual = pixel - kp.points[k];
                total += scale *
                         (gmof(residual.x(), options_.gmof_sigma) +
                          gmof(residual.y(), options_.gmof_sigma));
                if (gradient) {
                    const Vec2 dvalue(scale * gmof_derivative(residual.x(), options_.gmof_sigma),
                                      scale * gmof_derivative(residual.y(), options_.gmof_sigma));
                    const auto proj_jac = projection_jacobian(cameras[f], fk[f].joints[joint]);
                    const Vec3 dpoint = proj_jac.transpose() * dvalue;
                    dpos_accum[f].segment<3>(3 * joint) += dpoint;
                    gradient->segment<3>(camera_offset(f)) += dpoint;
                }
            }
        }

        // Priors on the parameters of this frame.
        for (int j = 1; j < nj; ++j) {
            const Vec3 r = x.segment<3>(fo + 3 * j);
            double prior_w;
            if (spec_.is_hand_joint(j)) {
                prior_w = w.hand_pose_prior;
            } else if (spec_.is_jaw_joint(j)) {
                for (int axis = 0; axis < 3; ++axis) {
                    total += sum_scale * w.jaw_pose_prior[axis] * r[axis] * r[axis];
                    if (gradient)
                        (*gradient)[fo + 3 * j + axis] +=
                            sum_scale * w.jaw_pose_prior[axis] * 2.0 * r[axis];
                }
                continue;
            } else {
                prior_w = w.body_pose_prior;
            }
            total += sum_scale * prior_w * r.squaredNorm();
            if (gradient) gradient->segment<3>(fo + 3 * j) += sum_scale * prior_w * 2.0 * r;
        }

        for (const auto& bend : spec_.bend_joints) {
            const int idx = fo + 3 * bend.joint + bend.axis;
            const double e = std::exp(bend.sign * x[idx]);
            total += sum_scale * w.bending_prior * e;
            if (gradient) (*gradient)[idx] += sum_scale * w.bending_prior * bend.sign * e;
        }

        // Per-frame shape prior (shared beta accumulates one share per frame).
        total += sum_scale * w.shape_prior * shape.beta.squaredNorm();
        if (gradient)
            gradient->segment(0, dim) += sum_scale * w.shape_prior * 2.0 * shape.beta;
    }

    // Shared-shape prior (phase 2).
    if (options_.shared_shape_prior) {
        const double w_shared = schedule_.shared_shape_prior[static_cast<size_t>(stage)];
        total += w_shared * shape.beta.squaredNorm();
        if (gradient) gradient->segment(0, dim) += w_shared * 2.0 * shape.beta;
    }

    // Temporal consistency across the window.
    if (options_.temporal && nf >= 2) {
        const bool have_context = options_.left_context_joints.has_value();
        const double wt = sum_scale * options_.temporal_weight;
        for (int f = 0; f < nf; ++f) {
            if (!temporal_active(f, nf, sequence_indices_[f], sequence_length_, have_context))
                continue;
            const std::vector<Vec3>& prev =
                (f == 0) ? *options_.left_context_joints : fk[f - 1].joints;
            const std::vector<Vec3>& next = fk[f + 1].joints;
            for (int j = 0; j < nj; ++j) {
                const Vec3 mean = (prev[j] + fk[f].joints[j] + next[j]) / 3.0;
                const Vec3 d = fk[f].joints[j] - mean;
                total += wt * d.squaredNorm();
                if (gradient) {
                    const Vec3 d2 = 2.0 * wt * d;
                    dpos_accum[f].segment<3>(3 * j) += (2.0 / 3.0) * d2;
                    if (f > 0) dpos_accum[f - 1].segment<3>(3 * j) -= d2 / 3.0;
                    dpos_accum[f + 1].segment<3>(3 * j) -= d2 / 3.0;
                }
            }
        }
    }

    if (gradient) {
        // Chain accumulated position sensitivities through the FK Jacobians.
        for (int f = 0; f < nf; ++f) {
            if (dpos_accum[f].isZero(0.0)) continue;
            const VecX chained = jac[f].dpos.transpose() * dpos_accum[f];
            gradient->segment(frame_offset(f), pose_cols) += chained.segment(0, pose_cols);
            gradient->segment(0, dim) += chained.segment(pose_cols, dim);
        }
        if (options_.freeze_shape) gradient->segment(0, dim).setZero();
    }
    return total;
}

void SequenceFitProblem::assert_finite(const VecX& x, int stage) const {
    if (!x.allFinite()) throw ValidationError("fit problem: non-finite parameters");
    const int nj = spec_.joint_count();
    ShapeParams shape;
    shape.beta = x.segment(0, spec_.shape_dim);
    PoseParams pose = PoseParams::rest(nj);
    for (int f = 0; f < frame_count(); ++f) {
        const int fo = frame_offset(f);
        pose.root_rotation = x.segment<3>(fo);
        for (int j = 1; j < nj; ++j) pose.joint_rotations[j - 1] = x.segment<3>(fo + 3 * j);
        CameraParams camera = intrinsics_;
        camera.translation = x.segment<3>(camera_offset(f));
        const FkResult fk = forward_kinematics(spec_, shape, pose);
        if (!frames_[f]) continue;
        for (int k = 0; k < frames_[f]->size(); ++k) {
            if (frames_[f]->confidence[k] <= 0.0) continue;
            Vec2 pixel;
            if (!project_point(camera, fk.joints[frames_[f]->joint_map[k]], pixel)) {
                std::ostringstream msg;
                msg << "frame " << sequence_indices_[f] << ": joint "
                    << spec_.joint_names[frames_[f]->joint_map[k]]
                    << " projects at or behind the camera plane";
                throw ValidationError(msg.str());
            }
        }
    }
    (void)stage;
}

void SequenceFitProblem::canonicalize(ParamBlock& block) const {
    const int nj = spec_.joint_count();
    for (int f = 0; f < frame_count(); ++f) {
        const int fo = frame_offset(f);
        for (int j = 0; j < nj; ++j) {
            const Vec3 aa = block.values.segment<3>(fo + 3 * j);
            block.values.segment<3>(fo + 3 * j) = canonicalize_axis_angle(aa);
        }
    }
}

const Objective& SequenceFitProblem::stage_objective(int stage) const {
    return stage_objectives_.at(static_cast<size_t>(stage));
}

std::vector<SolveReport> SequenceFitProblem::solve(ParamBlock& block,
                                                   const SolveOptions& options) const {
    assert_finite(block.values, 0);
    return run_stages(
        [this](int stage) -> const Objective& { return stage_objective(stage); },
        StageSchedule::kStageCount, block, options,
        [this](ParamBlock& b) { canonicalize(b); });
}

} // namespace seqfit
