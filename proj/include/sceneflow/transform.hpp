#pragma once

#include <Eigen/Core>

#include "sceneflow/types.hpp"

namespace sceneflow {

// Rigid body motion: p -> rotation * p + translation.
struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();

    static RigidTransform identity() { return {}; }
    static RigidTransform from_translation(const Vec3& t) {
        return {Mat3::Identity(), t};
    }

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }

    RigidTransform compose(const RigidTransform& other) const {
        return {rotation * other.rotation, rotation * other.translation + translation};
    }
    RigidTransform operator*(const RigidTransform& other) const {
        return compose(other);
    }

    RigidTransform inverse() const {
        Mat3 rt = rotation.transpose();
        return {rt, -(rt * translation)};
    }

    // Orthonormality and unit determinant within tol.
    bool is_valid(double tol = 1e-9) const;
};

// Rotation convention Rx(alpha) * Ry(beta) * Rz(gamma); beta canonical in
// (-pi/2, pi/2) on extraction.
struct EulerAngles {
    double alpha = 0.0;
    double beta = 0.0;
    double gamma = 0.0;
    // Set by rotation_to_euler when |cos(beta)| < 1e-8 and alpha/gamma are
    // not separable.
    bool gimbal_lock = false;

    Vec3 vec() const { return {alpha, beta, gamma}; }
};

Mat3 euler_to_rotation(const EulerAngles& e);
EulerAngles rotation_to_euler(const Mat3& r);

Mat3 rotation_about_x(double angle);
Mat3 rotation_about_y(double angle);
Mat3 rotation_about_z(double angle);

// Rodrigues exponential of a rotation vector (axis * angle).
Mat3 rotation_from_axis_angle(const Vec3& omega);

// Geodesic rotation angle of r, radians in [0, pi].
double rotation_angle(const Mat3& r);

Mat3 skew(const Vec3& v);

}  // namespace sceneflow
