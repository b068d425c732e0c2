#pragma once

#include <filesystem>

#include "sceneflow/flow_ops.hpp"
#include "sceneflow/pose_solver.hpp"
#include "sceneflow/types.hpp"

namespace sceneflow {

// Rigid = |projected scene flow| <= eps on valid pixels. Default eps 1e-3 px
// (exact zero is unattainable after float arithmetic).
BinaryMask rigidity_from_gt_psf(const FlowField& psf, double eps = 1e-3);

struct ResidualSegmentationOptions {
    double fb_threshold = 0.75;
    int dilation_patch = 10;
    SamplingOptions sampling;
    // Rigid where the dense alignment residual is below
    // max(median + mad_k * 1.4826 * MAD, min_threshold).
    double mad_k = 2.5;
    double min_threshold = 1e-4;  // meters; keeps exact scenes fully rigid
};

struct ResidualSegmentationResult {
    BinaryMask rigidity;
    PoseEstimate pose;
};

// Iterative residual-based rigidity: start all-rigid, then alternate pose
// refinement on the current rigid set with dense residual thresholding.
// Deterministic for a fixed cfg.seed. Throws InsufficientDataError /
// EstimationFailureError when a round cannot be solved.
ResidualSegmentationResult rigidity_from_residuals(
    const Intrinsics& intr, const DepthMap& depth0, const DepthMap& depth1,
    const FlowField& fwd, const FlowField& bwd, const SolverConfig& cfg,
    int rounds, const ResidualSegmentationOptions& opts = {});

// Reads a mask image (nonzero = rigid) and checks it against the expected
// frame size. Throws DataError on mismatch.
BinaryMask load_external_mask(const std::filesystem::path& path, int width,
                              int height);

}  // namespace sceneflow
