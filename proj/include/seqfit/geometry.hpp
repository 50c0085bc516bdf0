#pragma once

#include <Eigen/Core>
#include <Eigen/Dense>

#include <array>
#include <vector>

namespace seqfit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;
using VecX = Eigen::VectorXd;
using MatX = Eigen::MatrixXd;

/// Rotation matrix from an axis-angle vector (Rodrigues formula).
/// Stable for small angles via a series expansion.
Mat3 rodrigues(const Vec3& axis_angle);

/// Partial derivatives of rodrigues() with respect to the three
/// axis-angle components. Uses the Gallego-Yezzi closed form away from
/// the origin and a second-order series near it.
std::array<Mat3, 3> rodrigues_jacobian(const Vec3& axis_angle);

/// Skew-symmetric cross-product matrix, [v]x w = v x w.
Mat3 skew(const Vec3& v);

/// Remap an axis-angle vector so its magnitude falls in [0, pi].
/// The represented rotation is unchanged.
Vec3 canonicalize_axis_angle(const Vec3& axis_angle);

} // namespace seqfit
