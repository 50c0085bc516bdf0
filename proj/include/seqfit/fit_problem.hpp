#pragma once

#include "seqfit/body_model.hpp"
#include "seqfit/camera.hpp"
#include "seqfit/keypoints.hpp"
#include "seqfit/lbfgs.hpp"
#include "seqfit/losses.hpp"
#include "seqfit/param_block.hpp"
#include "seqfit/schedule.hpp"

#include <optional>
#include <vector>

namespace seqfit {

/// Joint objective over a set of frames sharing one shape vector, with
/// optional temporal-consistency coupling. Covers all three phases:
///   phase 1: one frame, shape free, no temporal term;
///   phase 2: subset frames, shared-shape prior active, no temporal term;
///   phase 3: window frames, shape frozen, temporal term active.
///
/// Objective value:
///   [w_shared(stage) * |beta|^2]  +  (1/F) * sum_f (E_o_f [+ E_T_f])
///
/// The temporal term follows the sliding-window rules: it is skipped for
/// the window's last frame, evaluated against the finalized left-neighbor
/// joints (constant) for the window's first frame, and identically zero
/// for the first and last frame of the sequence.
class SequenceFitProblem {
  public:
    struct Options {
        bool temporal = false;
        bool shared_shape_prior = false; // phase 2: adds w_shared(stage) * |beta|^2
        bool freeze_shape = false;
        double temporal_weight = 100.0;
        double gmof_sigma = kDefaultGmofSigma;
        // Posed joints (model space) of the finalized frame immediately
        // left of the window; consumed by the first frame's temporal term.
        std::optional<std::vector<Vec3>> left_context_joints;
    };

    SequenceFitProblem(const BodyModelSpec& spec, std::vector<const KeypointFrame*> frames,
                       std::vector<int> sequence_indices, int sequence_length,
                       const CameraParams& intrinsics, const StageSchedule& schedule,
                       const JointWeights& gamma, Options options);

    int frame_count() const { return static_cast<int>(frames_.size()); }

    /// Builds the parameter block: [shape | per frame: root, joints, camera].
    ParamBlock make_block(const ShapeParams& shape, const std::vector<PoseParams>& poses,
                          const std::vector<Vec3>& camera_translations) const;

    void read_block(const ParamBlock& block, ShapeParams& shape, std::vector<PoseParams>& poses,
                    std::vector<Vec3>& camera_translations) const;

    /// Objective value at x for the given stage; fills the exact analytic
    /// gradient when `gradient` is non-null. Returns +inf for infeasible
    /// probes (a joint at or behind the camera plane).
    double evaluate(const VecX& x, VecX* gradient, int stage) const;

    /// Throws ValidationError naming the frame when the objective is not
    /// finite at x (degenerate projection or non-finite parameters).
    void assert_finite(const VecX& x, int stage) const;

    /// Remaps every axis-angle segment into canonical [0, pi] magnitude.
    void canonicalize(ParamBlock& block) const;

    /// Objective bound to one stage, for run_stages.
    const Objective& stage_objective(int stage) const;

    /// Runs the five-stage schedule on the block.
    std::vector<SolveReport> solve(ParamBlock& block, const SolveOptions& options) const;

    int shape_offset() const { return 0; }
    int frame_offset(int local_frame) const;
    int camera_offset(int local_frame) const;

  private:
    class StageObjectiveAdapter final : public Objective {
      public:
        StageObjectiveAdapter(const SequenceFitProblem& problem, int stage)
            : problem_(problem), stage_(stage) {}
        double evaluate(const VecX& x, VecX* gradient) const override {
            return problem_.evaluate(x, gradient, stage_);
        }

      private:
        const SequenceFitProblem& problem_;
        int stage_;
    };

    const BodyModelSpec& spec_;
    std::vector<const KeypointFrame*> frames_; // null entries contribute no data term
    std::vector<int> sequence_indices_;
    int sequence_length_;
    CameraParams intrinsics_;
    const StageSchedule& schedule_;
    JointWeights gamma_;
    Options options_;
    mutable std::vector<StageObjectiveAdapter> stage_objectives_;
};

} // namespace seqfit
