#include "seqfit/pipeline.hpp"

#include "seqfit/errors.hpp"
#include "seqfit/rng.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace seqfit {

namespace {

int worker_count() {
    const char* env = std::getenv("SEQFIT_THREADS");
    if (!env) return 1;
    const int n = std::atoi(env);
    return std::clamp(n, 1, 64);
}

bool frame_usable(const KeypointFrame& frame) {
    for (double c : frame.confidence)
        if (c > 0.0) return true;
    return false;
}

double now_ms() {
    using namespace std::chrono;
    return duration<double, std::milli>(steady_clock::now().time_since_epoch()).count();
}

struct FrameSolveResult {
    FrameParams params;
    double final_objective = 0.0;
    int iterations = 0;
};

FrameSolveResult solve_single_frame(const BodyModelSpec& spec, const KeypointFrame& frame,
                                    const StageSchedule& schedule, const CameraParams& intrinsics,
                                    const RunConfig& config, const FrameParams& init) {
    SequenceFitProblem::Options opts;
    opts.gmof_sigma = config.gmof_sigma;
    SequenceFitProblem problem(spec, {&frame}, {0}, 1, intrinsics, schedule,
                               JointWeights::ones(spec.joint_count()), opts);
    ParamBlock block = problem.make_block(init.shape, {init.pose}, {init.camera_translation});
    const std::vector<SolveReport> reports = problem.solve(block, config.solver);

    FrameSolveResult result;
    std::vector<PoseParams> poses;
    std::vector<Vec3> cameras;
    problem.read_block(block, result.params.shape, poses, cameras);
    result.params.pose = poses[0];
    result.params.camera_translation = cameras[0];
    result.final_objective = reports.back().final_loss;
    for (const auto& r : reports) result.iterations += r.iterations;
    return result;
}

// Runs fn(i) for each index, over `threads` workers. Results must be
// written to disjoint slots; scheduling cannot affect them.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int n = std::min(threads, count);
    pool.reserve(static_cast<size_t>(n));
    for (int t = 0; t < n; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace

SequenceFit phase1_fit(const std::vector<KeypointFrame>& keypoints, const BodyModelSpec& spec,
                       const StageSchedule& schedule, const CameraParams& intrinsics,
                       const RunConfig& config, FitReport& report) {
    if (keypoints.empty()) throw ValidationError("phase 1: empty keypoint sequence");
    const int n = static_cast<int>(keypoints.size());
    const double t0 = now_ms();

    SequenceFit fit;
    fit.frames.assign(n, FrameParams{ShapeParams::zeros(spec.shape_dim),
                                     PoseParams::rest(spec.joint_count()), Vec3(0, 0, 3)});
    fit.provenance.assign(n, FrameProvenance::Phase1);
    fit.failed.assign(n, false);
    report.phase1.assign(n, FitReport::Phase1Frame{});

    // Initialization pass: depth from torso keypoints where possible.
    std::vector<FrameParams> inits = fit.frames;
    std::vector<char> depth_ok(n, 1);
    for (int i = 0; i < n; ++i) {
        if (!frame_usable(keypoints[i])) {
            fit.failed[i] = true;
            report.phase1[i].failed = true;
            continue;
        }
        try {
            inits[i].camera_translation =
                init_depth(intrinsics, spec, inits[i].shape, keypoints[i]);
        } catch (const ValidationError&) {
            depth_ok[i] = 0;
            report.phase1[i].depth_init_failed = true;
        }
    }

    // Frames with their own depth init are independent; solve in parallel.
    parallel_for(n, worker_count(), [&](int i) {
        if (fit.failed[i] || !depth_ok[i]) return;
        const FrameSolveResult r =
            solve_single_frame(spec, keypoints[i], schedule, intrinsics, config, inits[i]);
        fit.frames[i] = r.params;
        report.phase1[i].final_objective = r.final_objective;
        report.phase1[i].iterations = r.iterations;
    });

    // Frames whose depth init failed start from the previous solution.
    for (int i = 0; i < n; ++i) {
        if (fit.failed[i] || depth_ok[i]) continue;
        FrameParams init = inits[i];
        for (int j = i - 1; j >= 0; --j) {
            if (!fit.failed[j]) {
                init = fit.frames[j];
                break;
            }
        }
        const FrameSolveResult r =
            solve_single_frame(spec, keypoints[i], schedule, intrinsics, config, init);
        fit.frames[i] = r.params;
        report.phase1[i].final_objective = r.final_objective;
        report.phase1[i].iterations = r.iterations;
    }

    // Failed frames inherit the nearest fitted neighbor.
    std::vector<int> failed_list;
    for (int i = 0; i < n; ++i)
        if (fit.failed[i]) failed_list.push_back(i);
    if (!failed_list.empty()) {
        std::vector<int> fitted;
        for (int i = 0; i < n; ++i)
            if (!fit.failed[i]) fitted.push_back(i);
        std::ostringstream warning;
        warning << "frames without usable keypoints:";
        for (int i : failed_list) warning << ' ' << i;
        if (fitted.empty()) {
            warning << " (no fitted frames; rest pose emitted)";
        } else {
            for (int i : failed_list) {
                int best = fitted.front();
                for (int j : fitted)
                    if (std::abs(j - i) < std::abs(best - i)) best = j;
                fit.frames[i] = fit.frames[best];
            }
        }
        report.warnings.push_back(warning.str());
    }

    report.phase1_ms = now_ms() - t0;
    return fit;
}

std::vector<int> sample_subset(const std::vector<KeypointFrame>& keypoints, int size,
                               RunConfig::Sampling strategy, uint64_t seed) {
    const int n = static_cast<int>(keypoints.size());
    if (size <= 0) throw ValidationError("sample_subset: size must be positive");
    if (size > n) throw ValidationError("sample_subset: size exceeds sequence length");

    std::vector<int> indices(n);
    std::iota(indices.begin(), indices.end(), 0);
    if (size == n) return indices;

    if (strategy == RunConfig::Sampling::Random) {
        Rng rng(Rng::mix(seed, 0x5ab5e7ULL));
        for (int i = 0; i < size; ++i) {
            const int j = i + static_cast<int>(rng.next_below(static_cast<uint64_t>(n - i)));
            std::swap(indices[i], indices[j]);
        }
        indices.resize(size);
    } else {
        std::stable_sort(indices.begin(), indices.end(), [&](int a, int b) {
            const double ca = keypoints[a].mean_confidence();
            const double cb = keypoints[b].mean_confidence();
            if (ca != cb) return ca > cb;
            return a < b;
        });
        indices.resize(size);
    }
    std::sort(indices.begin(), indices.end());
    return indices;
}

ShapeParams phase2_shape_fit(SequenceFit& fit, const std::vector<int>& subset,
                             const std::vector<KeypointFrame>& keypoints,
                             const BodyModelSpec& spec, const StageSchedule& schedule,
                             const CameraParams& intrinsics, const RunConfig& config,
                             FitReport& report) {
    if (subset.empty()) throw ValidationError("phase 2: empty subset");
    const double t0 = now_ms();

    VecX mean_shape = VecX::Zero(spec.shape_dim);
    for (int i : subset) mean_shape += fit.frames[i].shape.beta;
    mean_shape /= static_cast<double>(subset.size());

    std::vector<const KeypointFrame*> frame_ptrs;
    std::vector<int> seq_indices;
    std::vector<PoseParams> poses;
    std::vector<Vec3> cameras;
    for (int i : subset) {
        frame_ptrs.push_back(&keypoints[i]);
        seq_indices.push_back(i);
        poses.push_back(fit.frames[i].pose);
        cameras.push_back(fit.frames[i].camera_translation);
    }

    SequenceFitProblem::Options opts;
    opts.shared_shape_prior = true;
    opts.gmof_sigma = config.gmof_sigma;
    SequenceFitProblem problem(spec, frame_ptrs, seq_indices,
                               static_cast<int>(keypoints.size()), intrinsics, schedule,
                               JointWeights::ones(spec.joint_count()), opts);

    ShapeParams shared;
    shared.beta = mean_shape;
    ParamBlock block = problem.make_block(shared, poses, cameras);
    FitReport::Phase2 phase2;
    phase2.subset = subset;
    phase2.stages = problem.solve(block, config.solver);

    std::vector<PoseParams> out_poses;
    std::vector<Vec3> out_cameras;
    problem.read_block(block, shared, out_poses, out_cameras);

    // Only the shared shape escapes this phase; poses stay at phase 1.
    for (auto& frame : fit.frames) frame.shape = shared;
    fit.shared_shape = shared;
    report.phase2 = std::move(phase2);
    report.phase2_ms = now_ms() - t0;
    return shared;
}

void phase3_temporal_fit(SequenceFit& fit, const std::vector<KeypointFrame>& keypoints,
                         const BodyModelSpec& spec, const StageSchedule& schedule,
                         const CameraParams& intrinsics, const RunConfig& config,
                         FitReport& report) {
    const int n_frames = fit.frame_count();
    if (n_frames == 0) throw ValidationError("phase 3: empty sequence");
    if (!fit.shared_shape)
        throw ValidationError("phase 3: shared shape missing (run phase 2 first)");
    if (config.window_size < 3) throw ValidationError("phase 3: window size must be >= 3");
    const double t0 = now_ms();

    const int window = std::min(config.window_size, n_frames);
    report.window_size = window;
    const ShapeParams& shared = *fit.shared_shape;

    const int last_start = n_frames - window;
    for (int start = 0; start <= last_start; ++start) {
        std::vector<const KeypointFrame*> frame_ptrs;
        std::vector<int> seq_indices;
        std::vector<PoseParams> poses;
        std::vector<Vec3> cameras;
        for (int i = start; i < start + window; ++i) {
            frame_ptrs.push_back(fit.failed[i] ? nullptr : &keypoints[i]);
            seq_indices.push_back(i);
            poses.push_back(fit.frames[i].pose);
            cameras.push_back(fit.frames[i].camera_translation);
        }

        SequenceFitProblem::Options opts;
        opts.temporal = true;
        opts.freeze_shape = true;
        opts.temporal_weight = config.temporal_weight;
        opts.gmof_sigma = config.gmof_sigma;
        if (start > 0) {
            const FkResult context =
                forward_kinematics(spec, shared, fit.frames[start - 1].pose);
            opts.left_context_joints = context.joints;
        }

        SequenceFitProblem problem(spec, frame_ptrs, seq_indices, n_frames, intrinsics, schedule,
                                   JointWeights::ones(spec.joint_count()), opts);
        ParamBlock block = problem.make_block(shared, poses, cameras);
        const std::vector<SolveReport> stages = problem.solve(block, config.solver);

        ShapeParams shape_out;
        std::vector<PoseParams> out_poses;
        std::vector<Vec3> out_cameras;
        problem.read_block(block, shape_out, out_poses, out_cameras);
        for (int i = start; i < start + window; ++i) {
            fit.frames[i].pose = out_poses[i - start];
            fit.frames[i].camera_translation = out_cameras[i - start];
            fit.provenance[i] = FrameProvenance::Phase3Intermediate;
        }
        for (int i = 0; i <= start; ++i) fit.provenance[i] = FrameProvenance::Phase3Final;

        FitReport::Phase3Window w;
        w.start = start;
        w.initial_loss = stages.front().initial_loss;
        w.final_loss = stages.back().final_loss;
        for (const auto& s : stages) w.iterations += s.iterations;
        report.phase3.push_back(w);
    }

    for (auto& p : fit.provenance) p = FrameProvenance::Phase3Final;
    report.phase3_ms = now_ms() - t0;
}

SequenceFit fit_sequence(const std::vector<KeypointFrame>& keypoints, const BodyModelSpec& spec,
                         const StageSchedule& schedule, const CameraParams& intrinsics,
                         const RunConfig& config, FitReport& report) {
    if (keypoints.empty()) throw ValidationError("fit_sequence: empty keypoint sequence");
    SequenceFit fit = phase1_fit(keypoints, spec, schedule, intrinsics, config, report);

    const int sample_size =
        std::min(config.shape_sample_size, static_cast<int>(keypoints.size()));
    const std::vector<int> subset =
        sample_subset(keypoints, sample_size, config.sampling, config.seed);
    phase2_shape_fit(fit, subset, keypoints, spec, schedule, intrinsics, config, report);
    phase3_temporal_fit(fit, keypoints, spec, schedule, intrinsics, config, report);
    finalize_report(fit, keypoints, spec, schedule, intrinsics, config, report);
    return fit;
}

std::vector<std::vector<Vec3>> fit_joint_positions(const SequenceFit& fit,
                                                   const BodyModelSpec& spec) {
    std::vector<std::vector<Vec3>> out;
    out.reserve(fit.frames.size());
    for (const auto& frame : fit.frames)
        out.push_back(forward_kinematics(spec, frame.shape, frame.pose).joints);
    return out;
}

std::vector<std::vector<Vec3>> fit_joint_positions_camera(const SequenceFit& fit,
                                                          const BodyModelSpec& spec) {
    std::vector<std::vector<Vec3>> out = fit_joint_positions(fit, spec);
    for (size_t i = 0; i < out.size(); ++i)
        for (auto& p : out[i]) p += fit.frames[i].camera_translation;
    return out;
}

void finalize_report(const SequenceFit& fit, const std::vector<KeypointFrame>& keypoints,
                     const BodyModelSpec& spec, const StageSchedule& schedule,
                     const CameraParams& intrinsics, const RunConfig& config, FitReport& report) {
    const int n = fit.frame_count();
    report.frame_objectives.assign(n, 0.0);
    report.frame_reprojection.assign(n, 0.0);
    report.frame_temporal.assign(n, 0.0);
    const StageWeights& w = schedule.stage(StageSchedule::kStageCount - 1);
    const JointWeights gamma = JointWeights::ones(spec.joint_count());

    std::vector<std::vector<Vec3>> joints = fit_joint_positions(fit, spec);
    for (int i = 0; i < n; ++i) {
        CameraParams camera = intrinsics;
        camera.translation = fit.frames[i].camera_translation;
        const FrameObjectiveTerms terms =
            frame_objective(spec, fit.frames[i].shape, fit.frames[i].pose, camera, keypoints[i],
                            gamma, w, config.gmof_sigma);
        report.frame_objectives[i] = terms.total();
        report.frame_reprojection[i] = terms.reprojection;
        if (i > 0 && i < n - 1)
            report.frame_temporal[i] = temporal_consistency_cost(
                joints[i - 1], joints[i], joints[i + 1], config.temporal_weight);
    }
}

} // namespace seqfit
