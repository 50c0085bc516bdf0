#pragma once

#include "seqfit/body_model.hpp"
#include "seqfit/geometry.hpp"
#include "seqfit/keypoints.hpp"

#include <vector>

namespace seqfit {

/// Pinhole camera with fixed intrinsics and an optimizable translation.
/// Rotation is the identity; viewpoint is absorbed by the body's global
/// rotation. Projection: pixel = principal_point + f * (x/z, y/z) of
/// (point + translation).
struct CameraParams {
    double focal_length = 5000.0; // pixels
    Vec2 principal_point = Vec2::Zero();
    Vec3 translation = Vec3(0.0, 0.0, 3.0); // meters, z > 0

    static CameraParams with_image(double focal, double width, double height) {
        CameraParams c;
        c.focal_length = focal;
        c.principal_point = Vec2(width / 2.0, height / 2.0);
        return c;
    }
};

constexpr double kMinProjectionDepth = 1e-6; // meters

/// Projects model-space points to pixels. Throws ValidationError naming
/// the offending point when a transformed point is at or behind the
/// camera plane.
std::vector<Vec2> project(const CameraParams& camera, const std::vector<Vec3>& points);

/// Single-point projection; returns false instead of throwing when the
/// depth is degenerate (used inside optimizer probes).
bool project_point(const CameraParams& camera, const Vec3& point, Vec2& pixel);

/// d(pixel) / d(point); the derivative with respect to the camera
/// translation is identical because the point enters as point + t.
Eigen::Matrix<double, 2, 3> projection_jacobian(const CameraParams& camera, const Vec3& point);

/// Initializes the camera translation from the torso keypoints: depth by
/// similar triangles between the rest-pose shoulder-hip distance and its
/// pixel-space counterpart, x/y so that the projected torso midpoint hits
/// the detected one. Throws ValidationError when a torso keypoint is
/// missing or has zero confidence.
Vec3 init_depth(const CameraParams& camera, const BodyModelSpec& spec, const ShapeParams& shape,
                const KeypointFrame& frame);

} // namespace seqfit
