#pragma once

#include <vector>

#include "sceneflow/types.hpp"

namespace sceneflow {

// One filtered 3D-3D pair. x0/x1 live in the frame-0 / frame-1 camera frames.
struct Correspondence {
    Vec3 x0 = Vec3::Zero();
    Vec3 x1 = Vec3::Zero();
    Vec2 source_pixel = Vec2::Zero();
    double weight = 1.0;
    bool inlier = true;
};

struct CorrespondenceSet {
    std::vector<Correspondence> items;

    size_t size() const { return items.size(); }
    bool empty() const { return items.empty(); }
    size_t inlier_count() const {
        size_t n = 0;
        for (const auto& c : items) n += c.inlier;
        return n;
    }
};

// Round-trip inconsistency mask (true = rejected). Pixel u is rejected when
// |fwd(u) + bwd(u + fwd(u))| > threshold with bwd sampled at the nearest
// pixel, or when the target leaves the image or either flow is invalid.
// Default threshold 0.75 px.
BinaryMask forward_backward_mask(const FlowField& fwd, const FlowField& bwd,
                                 double threshold = 0.75);

// Morphological dilation with a square structuring element of side `patch`
// (offsets -patch/2 .. patch - 1 - patch/2, so odd sizes are centered).
// Default patch 10.
BinaryMask dilate(const BinaryMask& mask, int patch = 10);

struct SamplingOptions {
    int stride = 4;
    int max_points = 10000;
    // Also emit pairs built from the backward flow (frame-1 stride grid).
    // The max_points cap applies to the total.
    bool include_backward = false;
};

// Builds 3D-3D pairs on the stride grid. A pixel qualifies when it is rigid,
// not excluded, has valid z0, valid forward flow, and a valid z1 at the
// nearest pixel of u0 + fwd(u0). `excluded` is used as given; callers that
// want boundary outliers removed pass the dilated union of the non-rigid and
// round-trip-rejected sets. If more than max_points survive, the ones with
// smallest z0 are kept (stable in scan order). Throws InsufficientDataError
// below 3 pairs.
CorrespondenceSet sample_correspondences(const Intrinsics& intr,
                                         const DepthMap& depth0,
                                         const DepthMap& depth1,
                                         const FlowField& fwd,
                                         const BinaryMask& rigid,
                                         const BinaryMask& excluded,
                                         const SamplingOptions& opts = {},
                                         const FlowField* bwd = nullptr);

}  // namespace sceneflow
