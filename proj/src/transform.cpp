#include "sceneflow/transform.hpp"

#include <Eigen/LU>
#include <cmath>

namespace sceneflow {

bool RigidTransform::is_valid(double tol) const {
    if (!rotation.allFinite() || !translation.allFinite()) return false;
    Mat3 err = rotation.transpose() * rotation - Mat3::Identity();
    if (err.cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(rotation.determinant() - 1.0) <= tol;
}

Mat3 rotation_about_x(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << 1, 0, 0, 0, c, -s, 0, s, c;
    return r;
}

Mat3 rotation_about_y(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << c, 0, s, 0, 1, 0, -s, 0, c;
    return r;
}

Mat3 rotation_about_z(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << c, -s, 0, s, c, 0, 0, 0, 1;
    return r;
}

Mat3 euler_to_rotation(const EulerAngles& e) {
    return rotation_about_x(e.alpha) * rotation_about_y(e.beta) *
           rotation_about_z(e.gamma);
}

EulerAngles rotation_to_euler(const Mat3& r) {
    // With R = Rx(a) Ry(b) Rz(c):
    //   R(0,2) =  sin b
    //   R(1,2) = -sin a cos b,  R(2,2) = cos a cos b
    //   R(0,1) = -cos b sin c,  R(0,0) = cos b cos c
    EulerAngles e;
    const double sb = std::clamp(r(0, 2), -1.0, 1.0);
    e.beta = std::asin(sb);
    const double cb = std::sqrt(std::max(0.0, 1.0 - sb * sb));
    if (cb < 1e-8) {
        // Only a +/- c (or a - c) is observable; fold everything into alpha.
        e.gimbal_lock = true;
        e.gamma = 0.0;
        e.alpha = std::atan2(r(2, 1), r(1, 1));
        return e;
    }
    e.alpha = std::atan2(-r(1, 2), r(2, 2));
    e.gamma = std::atan2(-r(0, 1), r(0, 0));
    return e;
}

Mat3 skew(const Vec3& v) {
    Mat3 m;
    m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
    return m;
}

Mat3 rotation_from_axis_angle(const Vec3& omega) {
    const double theta = omega.norm();
    if (theta < 1e-12) {
        // Second-order expansion keeps the result orthonormal to machine
        // precision for tiny angles.
        Mat3 k = skew(omega);
        return Mat3::Identity() + k + 0.5 * (k * k);
    }
    const Vec3 axis = omega / theta;
    Mat3 k = skew(axis);
    return Mat3::Identity() + std::sin(theta) * k + (1.0 - std::cos(theta)) * (k * k);
}

double rotation_angle(const Mat3& r) {
    // atan2 form of the log map: precise for small angles where the acos
    // variant bottoms out near sqrt(eps).
    const Vec3 v(r(2, 1) - r(1, 2), r(0, 2) - r(2, 0), r(1, 0) - r(0, 1));
    const double s = 0.5 * v.norm();
    const double c = std::clamp((r.trace() - 1.0) * 0.5, -1.0, 1.0);
    return std::atan2(s, c);
}

}  // namespace sceneflow
