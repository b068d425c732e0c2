#pragma once

#include "sceneflow/types.hpp"

namespace sceneflow {

// Pinhole projection of a camera-frame point. Throws DomainError for z <= 0.
Vec2 project(const Intrinsics& intr, const Vec3& p);

// Inverse projection of pixel u at depth z. Throws DomainError for z <= 0 or
// non-finite z. project(intr, backproject(intr, u, z)) == u.
Vec3 backproject(const Intrinsics& intr, const Vec2& u, double z);

// Huber penalty evaluated at residual magnitude s = |r|:
//   cost   = s^2 / 2                 for s <= delta
//            delta * (s - delta/2)   otherwise
//   weight = 1 for s <= delta, delta / s otherwise.
struct HuberResult {
    double cost = 0.0;
    double weight = 1.0;
};

HuberResult huber(double residual_norm, double delta);

template <typename Derived>
HuberResult huber(const Eigen::MatrixBase<Derived>& residual, double delta) {
    return huber(residual.norm(), delta);
}

}  // namespace sceneflow
