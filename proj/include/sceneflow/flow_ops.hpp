#pragma once

#include "sceneflow/transform.hpp"
#include "sceneflow/types.hpp"

namespace sceneflow {

enum class DepthSampling {
    Nearest,   // exact against piecewise-constant ground truth
    Bilinear,
};

// Image flow induced by camera motion alone: for each valid pixel u0 with
// depth z0, pi(c1 * pi^-1(u0, z0)) - u0. Pixels with invalid depth or a
// transformed point at z <= 0 are marked invalid.
FlowField egomotion_flow(const Intrinsics& intr, const DepthMap& depth0,
                         const RigidTransform& c1);

// 3D motion per pixel from optical flow and both depth maps:
//   dx = c1^-1 * pi^-1(u0 + flow, z1) - pi^-1(u0, z0)
// z1 is sampled from depth1 at u0 + flow. Pixels are invalid when the target
// leaves the image, the flow is invalid, or either depth is invalid.
SceneFlowField scene_flow_from_flow(const Intrinsics& intr, const DepthMap& depth0,
                                    const DepthMap& depth1, const FlowField& flow,
                                    const RigidTransform& c1,
                                    DepthSampling sampling = DepthSampling::Nearest);

// Componentwise flow_of - flow_cm; invalid where either input is invalid.
// Throws UsageError on dimension mismatch.
FlowField projected_scene_flow(const FlowField& flow_of, const FlowField& flow_cm);

// General two-view flow from known per-pixel world points and 3D motion:
//   du = pi(c1 * (x0 + dx)) - pi(c0 * x0)
// points0 are in the world frame of the c0 convention. Per-pixel invalidation
// when either projection has z <= 0 or an input is invalid.
FlowField flow_from_scene_flow(const Intrinsics& intr, const RigidTransform& c0,
                               const RigidTransform& c1, const PointMap& points0,
                               const SceneFlowField& dx);

}  // namespace sceneflow
