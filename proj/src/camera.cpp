#include "sceneflow/camera.hpp"

#include <cmath>

#include "sceneflow/errors.hpp"

namespace sceneflow {

Vec2 project(const Intrinsics& intr, const Vec3& p) {
    if (!(p.z() > 0.0)) throw DomainError("project: point depth must be positive");
    return {intr.fx * p.x() / p.z() + intr.cx, intr.fy * p.y() / p.z() + intr.cy};
}

Vec3 backproject(const Intrinsics& intr, const Vec2& u, double z) {
    if (!std::isfinite(z) || z <= 0.0)
        throw DomainError("backproject: depth must be positive and finite");
    return {(u.x() - intr.cx) / intr.fx * z, (u.y() - intr.cy) / intr.fy * z, z};
}

HuberResult huber(double residual_norm, double delta) {
    if (!(delta > 0.0)) throw UsageError("huber: delta must be positive");
    const double s = std::abs(residual_norm);
    if (s <= delta) return {0.5 * s * s, 1.0};
    return {delta * (s - 0.5 * delta), delta / s};
}

}  // namespace sceneflow
