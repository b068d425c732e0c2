#include "sceneflow/flow_ops.hpp"

#include <cmath>

#include "sceneflow/errors.hpp"

namespace sceneflow {

namespace {

inline Vec3 unproject(const Intrinsics& intr, double u, double v, double z) {
    return {(u - intr.cx) / intr.fx * z, (v - intr.cy) / intr.fy * z, z};
}

inline Vec2 project_unchecked(const Intrinsics& intr, const Vec3& p) {
    return {intr.fx * p.x() / p.z() + intr.cx, intr.fy * p.y() / p.z() + intr.cy};
}

// Depth at a continuous position, or a non-positive value when unusable.
double sample_depth(const DepthMap& depth, double u, double v, DepthSampling mode) {
    if (mode == DepthSampling::Nearest) {
        const int x = static_cast<int>(std::lround(u));
        const int y = static_cast<int>(std::lround(v));
        if (!depth.in_bounds(x, y) || !depth.valid(x, y)) return -1.0;
        return depth(x, y);
    }
    const int x0 = static_cast<int>(std::floor(u));
    const int y0 = static_cast<int>(std::floor(v));
    const int x1 = x0 + 1, y1 = y0 + 1;
    if (!depth.in_bounds(x0, y0) || !depth.in_bounds(x1, y1)) {
        // Fall back to nearest at the borders.
        return sample_depth(depth, u, v, DepthSampling::Nearest);
    }
    if (!depth.valid(x0, y0) || !depth.valid(x1, y0) || !depth.valid(x0, y1) ||
        !depth.valid(x1, y1))
        return -1.0;
    const double ax = u - x0, ay = v - y0;
    const double top = depth(x0, y0) * (1 - ax) + depth(x1, y0) * ax;
    const double bot = depth(x0, y1) * (1 - ax) + depth(x1, y1) * ax;
    return top * (1 - ay) + bot * ay;
}

}  // namespace

FlowField egomotion_flow(const Intrinsics& intr, const DepthMap& depth0,
                         const RigidTransform& c1) {
    if (!depth0.grid().same_size(intr.width, intr.height))
        throw UsageError("egomotion_flow: depth does not match intrinsics");
    FlowField flow(intr.width, intr.height);
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            if (!depth0.valid(x, y)) {
                flow.set_invalid(x, y);
                continue;
            }
            const Vec3 p0 = unproject(intr, x, y, depth0(x, y));
            const Vec3 p1 = c1.apply(p0);
            if (p1.z() <= 0.0) {
                flow.set_invalid(x, y);
                continue;
            }
            flow(x, y) = project_unchecked(intr, p1) - Vec2(x, y);
        }
    }
    return flow;
}

SceneFlowField scene_flow_from_flow(const Intrinsics& intr, const DepthMap& depth0,
                                    const DepthMap& depth1, const FlowField& flow,
                                    const RigidTransform& c1, DepthSampling sampling) {
    if (!depth0.grid().same_size(intr.width, intr.height) ||
        !depth1.grid().same_size(intr.width, intr.height) ||
        !flow.grid().same_size(intr.width, intr.height))
        throw UsageError("scene_flow_from_flow: dimension mismatch");
    const RigidTransform c1_inv = c1.inverse();
    SceneFlowField out(intr.width, intr.height);
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            if (!depth0.valid(x, y) || !flow.valid(x, y)) {
                out.set_invalid(x, y);
                continue;
            }
            const Vec2& f = flow(x, y);
            const double u1 = x + f.x();
            const double v1 = y + f.y();
            if (!intr.contains_rounded(u1, v1)) {
                out.set_invalid(x, y);
                continue;
            }
            const double z1 = sample_depth(depth1, u1, v1, sampling);
            if (z1 <= 0.0) {
                out.set_invalid(x, y);
                continue;
            }
            const Vec3 x0 = unproject(intr, x, y, depth0(x, y));
            const Vec3 x1 = unproject(intr, u1, v1, z1);
            out(x, y) = c1_inv.apply(x1) - x0;
        }
    }
    return out;
}

FlowField projected_scene_flow(const FlowField& flow_of, const FlowField& flow_cm) {
    if (!flow_of.grid().same_size(flow_cm.grid()))
        throw UsageError("projected_scene_flow: dimension mismatch");
    FlowField out(flow_of.width(), flow_of.height());
    for (int y = 0; y < flow_of.height(); ++y) {
        for (int x = 0; x < flow_of.width(); ++x) {
            if (!flow_of.valid(x, y) || !flow_cm.valid(x, y)) {
                out.set_invalid(x, y);
                continue;
            }
            out(x, y) = flow_of(x, y) - flow_cm(x, y);
        }
    }
    return out;
}

FlowField flow_from_scene_flow(const Intrinsics& intr, const RigidTransform& c0,
                               const RigidTransform& c1, const PointMap& points0,
                               const SceneFlowField& dx) {
    if (!points0.grid().same_size(intr.width, intr.height) ||
        !dx.grid().same_size(intr.width, intr.height))
        throw UsageError("flow_from_scene_flow: dimension mismatch");
    FlowField out(intr.width, intr.height);
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            if (!points0.valid(x, y) || !dx.valid(x, y)) {
                out.set_invalid(x, y);
                continue;
            }
            const Vec3& x0 = points0(x, y);
            const Vec3 p0 = c0.apply(x0);
            const Vec3 p1 = c1.apply(x0 + dx(x, y));
            if (p0.z() <= 0.0 || p1.z() <= 0.0) {
                out.set_invalid(x, y);
                continue;
            }
            out(x, y) = project_unchecked(intr, p1) - project_unchecked(intr, p0);
        }
    }
    return out;
}

}  // namespace sceneflow
