#pragma once

#include "seqfit/body_model.hpp"
#include "seqfit/camera.hpp"
#include "seqfit/fit_problem.hpp"
#include "seqfit/keypoints.hpp"
#include "seqfit/lbfgs.hpp"
#include "seqfit/schedule.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace seqfit {

enum class FrameProvenance { Phase1, Phase3Intermediate, Phase3Final };

struct FrameParams {
    ShapeParams shape;
    PoseParams pose;
    Vec3 camera_translation = Vec3(0.0, 0.0, 3.0);
};

/// Fit state for a whole sequence. After phase 2 every frame's shape
/// vector equals shared_shape exactly.
struct SequenceFit {
    std::vector<FrameParams> frames;
    std::vector<FrameProvenance> provenance;
    std::vector<bool> failed; // no usable keypoints; parameters interpolated
    std::optional<ShapeParams> shared_shape;

    int frame_count() const { return static_cast<int>(frames.size()); }
};

struct RunConfig {
    int window_size = 7;
    int shape_sample_size = 15;
    double temporal_weight = 100.0;
    enum class Sampling { Random, TopConfidence };
    Sampling sampling = Sampling::Random;
    uint64_t seed = 0;
    SolveOptions solver;
    double gmof_sigma = kDefaultGmofSigma;
    double focal_length = 5000.0;
    std::optional<Vec2> principal_point; // default: image center
    std::string weights_path;            // provenance only
};

struct FitReport {
    struct Phase1Frame {
        bool failed = false;
        bool depth_init_failed = false;
        double final_objective = 0.0;
        int iterations = 0;
    };
    struct Phase2 {
        std::vector<int> subset;
        std::vector<SolveReport> stages;
    };
    struct Phase3Window {
        int start = 0;
        double initial_loss = 0.0;
        double final_loss = 0.0;
        int iterations = 0;
    };

    std::vector<std::string> warnings;
    std::vector<Phase1Frame> phase1;
    std::optional<Phase2> phase2;
    std::vector<Phase3Window> phase3;
    int window_size = 0;

    // Final per-frame diagnostics at stage-5 weights.
    std::vector<double> frame_objectives;
    std::vector<double> frame_reprojection;
    std::vector<double> frame_temporal;

    // Wall-clock milliseconds per phase; serialized only on request so
    // that output files stay byte-reproducible.
    double phase1_ms = 0.0, phase2_ms = 0.0, phase3_ms = 0.0;
};

/// Per-frame five-stage fits (Eq. 1): every frame's pose, shape, camera
/// translation and global rotation are optimized independently. Frames
/// without usable keypoints are flagged and copied from the nearest
/// fitted neighbor.
SequenceFit phase1_fit(const std::vector<KeypointFrame>& keypoints, const BodyModelSpec& spec,
                       const StageSchedule& schedule, const CameraParams& intrinsics,
                       const RunConfig& config, FitReport& report);

/// Frame subset for the shape fit: uniform without replacement under the
/// seed, or the `size` frames with the highest mean keypoint confidence
/// (ties to the lower index). Returned sorted ascending.
std::vector<int> sample_subset(const std::vector<KeypointFrame>& keypoints, int size,
                               RunConfig::Sampling strategy, uint64_t seed);

/// Shared-shape fit (Eq. 4-5) over the subset. The shared vector starts
/// at the mean of the phase-1 subset shapes; subset poses and cameras are
/// re-optimized internally but only the shape escapes. On return every
/// frame of `fit` carries the shared shape.
ShapeParams phase2_shape_fit(SequenceFit& fit, const std::vector<int>& subset,
                             const std::vector<KeypointFrame>& keypoints,
                             const BodyModelSpec& spec, const StageSchedule& schedule,
                             const CameraParams& intrinsics, const RunConfig& config,
                             FitReport& report);

/// Sliding-window temporal fit (Eq. 6-7): shape frozen, windows of
/// `window_size` frames advancing by one, temporal term skipped for each
/// window's last frame and evaluated against the finalized left neighbor
/// for its first. A window size larger than the sequence falls back to
/// one full-sequence solve.
void phase3_temporal_fit(SequenceFit& fit, const std::vector<KeypointFrame>& keypoints,
                         const BodyModelSpec& spec, const StageSchedule& schedule,
                         const CameraParams& intrinsics, const RunConfig& config,
                         FitReport& report);

/// The full three-phase pipeline.
SequenceFit fit_sequence(const std::vector<KeypointFrame>& keypoints, const BodyModelSpec& spec,
                         const StageSchedule& schedule, const CameraParams& intrinsics,
                         const RunConfig& config, FitReport& report);

/// Model-space joint positions per frame of a fit.
std::vector<std::vector<Vec3>> fit_joint_positions(const SequenceFit& fit,
                                                   const BodyModelSpec& spec);

/// Camera-space joint positions (model space plus the frame's camera
/// translation): the reconstruction the metrics operate on.
std::vector<std::vector<Vec3>> fit_joint_positions_camera(const SequenceFit& fit,
                                                          const BodyModelSpec& spec);

/// Fills the final per-frame diagnostic losses of `report`.
void finalize_report(const SequenceFit& fit, const std::vector<KeypointFrame>& keypoints,
                     const BodyModelSpec& spec, const StageSchedule& schedule,
                     const CameraParams& intrinsics, const RunConfig& config, FitReport& report);

} // namespace seqfit
