#include "sceneflow/pipeline.hpp"

#include <cmath>

#include "sceneflow/camera.hpp"
#include "sceneflow/errors.hpp"

namespace sceneflow {

PipelineInput PipelineInput::from_bundle(const GroundTruthBundle& bundle) {
    PipelineInput input;
    input.intrinsics = bundle.intrinsics;
    input.depth0 = bundle.depth0;
    input.depth1 = bundle.depth1;
    input.flow_fwd = bundle.flow_fwd;
    input.flow_bwd = bundle.flow_bwd;
    input.valid = bundle.valid;
    GroundTruth gt;
    gt.pose01 = bundle.pose01;
    gt.rigidity = bundle.rigidity;
    gt.occlusion_fwd = bundle.occlusion_fwd;
    gt.scene_flow = bundle.scene_flow;
    input.gt = std::move(gt);
    return input;
}

namespace {

DepthMap clamp_depth_range(const DepthMap& depth,
                           const std::optional<std::pair<double, double>>& range) {
    if (!range) return depth;
    DepthMap out = depth;
    for (int y = 0; y < out.height(); ++y)
        for (int x = 0; x < out.width(); ++x)
            if (out.valid(x, y) &&
                (out(x, y) < range->first || out(x, y) > range->second))
                out.set_invalid(x, y);
    return out;
}

BinaryMask measurement_valid_mask(const PipelineInput& input, const DepthMap& depth0) {
    const int w = input.intrinsics.width, h = input.intrinsics.height;
    BinaryMask mask(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            bool ok = depth0.valid(x, y) && input.flow_fwd.valid(x, y);
            if (input.valid) ok = ok && input.valid->get(x, y);
            mask.set(x, y, ok);
        }
    return mask;
}

}  // namespace

PipelineResult run_pipeline(const PipelineInput& input, const PipelineOptions& opts) {
    const Intrinsics& intr = input.intrinsics;
    const int w = intr.width, h = intr.height;
    if (!intr.valid()) throw UsageError("pipeline: invalid intrinsics");
    if (!input.depth0.grid().same_size(w, h) || !input.depth1.grid().same_size(w, h) ||
        !input.flow_fwd.grid().same_size(w, h))
        throw UsageError("pipeline: input dimensions do not match intrinsics");

    const DepthMap depth0 = clamp_depth_range(input.depth0, opts.depth_range);
    const DepthMap depth1 = clamp_depth_range(input.depth1, opts.depth_range);
    const BinaryMask measured = measurement_valid_mask(input, depth0);

    PipelineResult result;

    // Round-trip consistency (the occlusion/outlier stand-in). Without a
    // backward field nothing is rejected.
    if (input.flow_bwd) {
        result.fb_rejected =
            forward_backward_mask(input.flow_fwd, *input.flow_bwd, opts.fb_threshold);
    } else {
        result.fb_rejected = BinaryMask(w, h, false);
    }

    // Rigidity source.
    switch (opts.rigidity_source) {
        case RigiditySource::AllRigid:
            result.rigidity_used = measured;
            break;
        case RigiditySource::GtPsf: {
            if (!input.gt)
                throw UsageError("pipeline: gt-psf rigidity requires ground truth");
            const FlowField ego_gt = egomotion_flow(intr, depth0, input.gt->pose01);
            const FlowField psf_gt = projected_scene_flow(input.flow_fwd, ego_gt);
            result.rigidity_used = rigidity_from_gt_psf(psf_gt, opts.gt_psf_eps);
            break;
        }
        case RigiditySource::Residual: {
            if (!input.flow_bwd)
                throw UsageError(
                    "pipeline: residual rigidity requires a backward flow");
            ResidualSegmentationOptions seg;
            seg.fb_threshold = opts.fb_threshold;
            seg.dilation_patch = opts.dilation_patch;
            seg.sampling = opts.sampling;
            const auto seg_result =
                rigidity_from_residuals(intr, depth0, depth1, input.flow_fwd,
                                        *input.flow_bwd, opts.solver,
                                        opts.residual_rounds, seg);
            result.rigidity_used = seg_result.rigidity;
            break;
        }
        case RigiditySource::External:
            result.rigidity_used = load_external_mask(opts.external_mask_path, w, h);
            break;
    }
    // Never sample where the measurements themselves are unusable.
    result.rigidity_used = BinaryMask::intersect(result.rigidity_used, measured);

    // Boundary-safe exclusion set: dilated union of non-rigid and rejected.
    const BinaryMask exclusion =
        dilate(BinaryMask::unite(result.rigidity_used.complement(), result.fb_rejected),
               opts.dilation_patch);

    CorrespondenceSet corr =
        sample_correspondences(intr, depth0, depth1, input.flow_fwd,
                               result.rigidity_used, exclusion, opts.sampling,
                               input.flow_bwd ? &*input.flow_bwd : nullptr);
    result.correspondence_count = corr.size();

    RigidTransform init = RigidTransform::identity();
    switch (opts.init) {
        case PoseInit::Identity:
            break;
        case PoseInit::External:
            init = opts.external_init;
            break;
        case PoseInit::Ransac: {
            const PoseEstimate ransac = ransac_pose(corr, opts.solver);
            init = ransac.transform;
            break;
        }
    }
    result.pose = gauss_newton_refine(corr, init, opts.solver);

    // Flow decomposition under the estimated pose.
    result.egomotion = egomotion_flow(intr, depth0, result.pose.transform);
    result.projected_scene_flow =
        projected_scene_flow(input.flow_fwd, result.egomotion);
    result.scene_flow = scene_flow_from_flow(intr, depth0, depth1, input.flow_fwd,
                                             result.pose.transform,
                                             opts.depth_sampling);

    if (opts.compute_metrics && input.gt) {
        FramePairMetrics m;
        const FlowField ego_gt = egomotion_flow(intr, depth0, input.gt->pose01);
        // Reference projected scene flow: reconstructed from the true pose
        // and 3D motion when available, so flow noise shows up in the PSF
        // error; otherwise fall back
        // to the measured flow (pose error only).
        FlowField gt_flow = input.flow_fwd;
        if (input.gt->scene_flow) {
            PointMap points(w, h);
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) {
                    if (depth0.valid(x, y))
                        points(x, y) = backproject(intr, Vec2(x, y), depth0(x, y));
                    else
                        points.set_invalid(x, y);
                }
            gt_flow = flow_from_scene_flow(intr, RigidTransform::identity(),
                                           input.gt->pose01, points,
                                           *input.gt->scene_flow);
        }
        const FlowField psf_gt = projected_scene_flow(gt_flow, ego_gt);
        m.epe_ef = epe(result.egomotion, ego_gt, measured);
        m.epe_psf = epe(result.projected_scene_flow, psf_gt, measured);
        const RelativePoseError pose_err = rpe(result.pose.transform, input.gt->pose01);
        m.rpe_t = pose_err.translation_m;
        m.rpe_r = pose_err.rotation_deg;
        m.rpe_r_geodesic = pose_err.rotation_geodesic_deg;
        m.rigidity_miou = mean_iou(result.rigidity_used, input.gt->rigidity);
        m.nonrigid_ratio =
            nonrigid_ratio(input.gt->rigidity, input.valid ? &*input.valid : nullptr);
        result.metrics = m;
    }
    return result;
}

}  // namespace sceneflow
