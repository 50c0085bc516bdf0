#include "seqfit/geometry.hpp"

#include <cmath>

namespace seqfit {

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
        -v.y(), v.x(), 0.0;
    return m;
}

Mat3 rodrigues(const Vec3& axis_angle) {
    const double theta2 = axis_angle.squaredNorm();
    const Mat3 k = skew(axis_angle);
    if (theta2 < 1e-16) {
        // R = I + [v]x + 0.5 [v]x^2, error O(theta^3)
        return Mat3::Identity() + k + 0.5 * (k * k);
    }
    const double theta = std::sqrt(theta2);
    const double a = std::sin(theta) / theta;
    const double b = (1.0 - std::cos(theta)) / theta2;
    return Mat3::Identity() + a * k + b * (k * k);
}

std::array<Mat3, 3> rodrigues_jacobian(const Vec3& axis_angle) {
    std::array<Mat3, 3> jac;
    const double theta2 = axis_angle.squaredNorm();
    if (theta2 < 1e-14) {
        const Mat3 k = skew(axis_angle);
        for (int i = 0; i < 3; ++i) {
            const Mat3 ei = skew(Vec3::Unit(i));
            jac[i] = ei + 0.5 * (ei * k + k * ei);
        }
        return jac;
    }
    // dR/dv_i = (v_i [v]x + [v x (I - R) e_i]x) / |v|^2 * R
    const Mat3 r = rodrigues(axis_angle);
    const Mat3 k = skew(axis_angle);
    const Mat3 i_minus_r = Mat3::Identity() - r;
    for (int i = 0; i < 3; ++i) {
        const Vec3 w = axis_angle.cross(i_minus_r.col(i));
        jac[i] = ((axis_angle[i] * k + skew(w)) / theta2) * r;
    }
    return jac;
}

Vec3 canonicalize_axis_angle(const Vec3& axis_angle) {
    const double theta = axis_angle.norm();
    if (theta <= M_PI) return axis_angle;
    // Shift the angle by multiples of 2*pi into (-pi, pi]; a negative
    // result flips the axis, which encodes the same rotation.
    const double wrapped = theta - 2.0 * M_PI * std::floor((theta + M_PI) / (2.0 * M_PI));
    return axis_angle * (wrapped / theta);
}

} // namespace seqfit
