#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "sceneflow/correspondence.hpp"
#include "sceneflow/evaluation.hpp"
#include "sceneflow/flow_ops.hpp"
#include "sceneflow/pose_solver.hpp"
#include "sceneflow/rigidity.hpp"
#include "sceneflow/synthgen.hpp"

namespace sceneflow {

enum class RigiditySource {
    AllRigid,   // refine on everything valid ("refine only" baseline)
    GtPsf,      // threshold the ground-truth projected scene flow
    Residual,   // iterative residual segmentation
    External,   // mask file
};

enum class PoseInit {
    Identity,
    External,  // caller-provided transform (stand-in for a learned prior)
    Ransac,
};

struct PipelineOptions {
    RigiditySource rigidity_source = RigiditySource::GtPsf;
    std::filesystem::path external_mask_path;
    double gt_psf_eps = 1e-3;   // pixels
    int residual_rounds = 3;

    PoseInit init = PoseInit::Identity;
    RigidTransform external_init;

    double fb_threshold = 0.75;       // pixels
    int dilation_patch = 10;
    SamplingOptions sampling;          // stride 4, cap 10000
    SolverConfig solver;
    DepthSampling depth_sampling = DepthSampling::Nearest;

    // Depth validity window for ingested data, meters.
    std::optional<std::pair<double, double>> depth_range =
        std::make_pair(0.1, 8.0);

    bool compute_metrics = true;  // requires ground truth in the input
};

// Measured inputs plus (optionally) ground truth for the rigidity oracle and
// the metrics.
struct PipelineInput {
    Intrinsics intrinsics;
    DepthMap depth0, depth1;
    FlowField flow_fwd;
    std::optional<FlowField> flow_bwd;
    std::optional<BinaryMask> valid;

    struct GroundTruth {
        RigidTransform pose01;
        BinaryMask rigidity;
        BinaryMask occlusion_fwd;
        // When present, the reference projected scene flow is reconstructed
        // from it; otherwise the measured flow stands in.
        std::optional<SceneFlowField> scene_flow;
    };
    std::optional<GroundTruth> gt;

    static PipelineInput from_bundle(const GroundTruthBundle& bundle);
};

struct PipelineResult {
    PoseEstimate pose;
    BinaryMask rigidity_used;
    BinaryMask fb_rejected;
    size_t correspondence_count = 0;
    FlowField egomotion;             // from the estimated pose
    FlowField projected_scene_flow;  // measured flow minus egomotion
    SceneFlowField scene_flow;       // from the estimated pose
    std::optional<FramePairMetrics> metrics;
};

// Full two-frame estimation: rigidity selection, round-trip filtering,
// dilation, sampling, pose initialization and refinement, then the flow
// decomposition (and metrics when ground truth is present).
PipelineResult run_pipeline(const PipelineInput& input, const PipelineOptions& opts);

}  // namespace sceneflow
