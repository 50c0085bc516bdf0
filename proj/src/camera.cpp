#include "seqfit/camera.hpp"

#include "seqfit/errors.hpp"

#include <cmath>
#include <sstream>

namespace seqfit {

bool project_point(const CameraParams& camera, const Vec3& point, Vec2& pixel) {
    const Vec3 p = point + camera.translation;
    if (p.z() < kMinProjectionDepth) return false;
    pixel = camera.principal_point + camera.focal_length * Vec2(p.x() / p.z(), p.y() / p.z());
    return true;
}

std::vector<Vec2> project(const CameraParams& camera, const std::vector<Vec3>& points) {
    std::vector<Vec2> pixels(points.size());
    for (size_t i = 0; i < points.size(); ++i) {
        if (!project_point(camera, points[i], pixels[i])) {
            std::ostringstream msg;
            msg << "degenerate projection: point " << i << " at or behind the camera plane";
            throw ValidationError(msg.str());
        }
    }
    return pixels;
}

Eigen::Matrix<double, 2, 3> projection_jacobian(const CameraParams& camera, const Vec3& point) {
    const Vec3 p = point + camera.translation;
    const double inv_z = 1.0 / p.z();
    Eigen::Matrix<double, 2, 3> jac;
    jac << inv_z, 0.0, -p.x() * inv_z * inv_z,
           0.0, inv_z, -p.y() * inv_z * inv_z;
    return camera.focal_length * jac;
}

namespace {

// Returns (2D point, ok) of the keypoint mapped to the named model joint.
bool find_keypoint(const BodyModelSpec& spec, const KeypointFrame& frame, const char* joint_name,
                   Vec2& point) {
    const int joint = spec.joint_index(joint_name);
    if (joint < 0) return false;
    for (int k = 0; k < frame.size(); ++k) {
        if (frame.joint_map[k] == joint && frame.confidence[k] > 0.0) {
            point = frame.points[k];
            return true;
        }
    }
    return false;
}

} // namespace

Vec3 init_depth(const CameraParams& camera, const BodyModelSpec& spec, const ShapeParams& shape,
                const KeypointFrame& frame) {
    Vec2 ls, rs, lh, rh;
    if (!find_keypoint(spec, frame, "left_shoulder", ls) ||
        !find_keypoint(spec, frame, "right_shoulder", rs) ||
        !find_keypoint(spec, frame, "left_hip", lh) || !find_keypoint(spec, frame, "right_hip", rh))
        throw ValidationError("depth init failed: torso keypoints missing or zero-confidence");

    const std::vector<Vec3> rest = regress_joints(spec, shape);
    const Vec3 shoulder_3d =
        0.5 * (rest[spec.joint_index("left_shoulder")] + rest[spec.joint_index("right_shoulder")]);
    const Vec3 hip_3d =
        0.5 * (rest[spec.joint_index("left_hip")] + rest[spec.joint_index("right_hip")]);

    const Vec2 shoulder_2d = 0.5 * (ls + rs);
    const Vec2 hip_2d = 0.5 * (lh + rh);

    const double torso_3d = (shoulder_3d - hip_3d).norm();
    const double torso_2d = (shoulder_2d - hip_2d).norm();
    if (torso_2d <= 0.0 || torso_3d <= 0.0)
        throw ValidationError("depth init failed: degenerate torso extent");

    const double z = camera.focal_length * torso_3d / torso_2d;
    const Vec3 torso_mid = 0.5 * (shoulder_3d + hip_3d);
    const Vec2 target = 0.5 * (shoulder_2d + hip_2d);

    Vec3 translation;
    translation.z() = z - torso_mid.z();
    translation.x() = (target.x() - camera.principal_point.x()) * z / camera.focal_length - torso_mid.x();
    translation.y() = (target.y() - camera.principal_point.y()) * z / camera.focal_length - torso_mid.y();
    return translation;
}

} // namespace seqfit
