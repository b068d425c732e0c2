// Command-line front end: synthetic data generation, two-frame estimation,
// batch evaluation, and flow visualization.

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <thread>

#include <CLI11.hpp>

#include "sceneflow/errors.hpp"
#include "sceneflow/io_formats.hpp"
#include "sceneflow/pipeline.hpp"
#include "sceneflow/viz.hpp"

namespace fs = std::filesystem;
using namespace sceneflow;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFormat = 3;
constexpr int kExitInsufficientData = 4;
constexpr int kExitEstimationFailure = 5;

struct PipelineFlags {
    std::string rigidity = "gt-psf";
    std::string mask_path;
    std::string init = "identity";
    std::string init_pose_path;
    double fb_threshold = 0.75;
    int dilation = 10;
    int stride = 4;
    int max_points = 10000;
    std::string huber_delta = "0.05";
    bool no_huber = false;
    int gn_iterations = 30;
    int residual_rounds = 3;
    int ransac_iterations = 1000;
    double ransac_threshold = 0.05;
    uint64_t seed = 0;
    std::vector<double> depth_range = {0.1, 8.0};
    bool bilinear_depth = false;
    double gt_psf_eps = 1e-3;

    void attach(CLI::App* cmd) {
        cmd->add_option("--rigidity", rigidity,
                        "Rigidity source: all | gt-psf | residual | external")
            ->check(CLI::IsMember({"all", "gt-psf", "residual", "external"}))
            ->capture_default_str();
        cmd->add_option("--mask", mask_path,
                        "Rigidity mask image for --rigidity external");
        cmd->add_option("--init", init, "Pose init: identity | external | ransac")
            ->check(CLI::IsMember({"identity", "external", "ransac"}))
            ->capture_default_str();
        cmd->add_option("--init-pose", init_pose_path,
                        "Trajectory file providing the external initial pose");
        cmd->add_option("--fb-threshold", fb_threshold,
                        "Forward-backward consistency threshold in pixels")
            ->capture_default_str();
        cmd->add_option("--dilation", dilation,
                        "Dilation patch size for the exclusion mask")
            ->capture_default_str();
        cmd->add_option("--stride", stride, "Correspondence sampling stride")
            ->capture_default_str();
        cmd->add_option("--max-points", max_points,
                        "Correspondence cap (closest-first)")
            ->capture_default_str();
        cmd->add_option("--huber-delta", huber_delta,
                        "Huber scale in meters, or 'auto'")
            ->capture_default_str();
        cmd->add_flag("--no-huber", no_huber, "Plain least squares (no robust loss)");
        cmd->add_option("--gn-iterations", gn_iterations,
                        "Max Gauss-Newton iterations")
            ->capture_default_str();
        cmd->add_option("--residual-rounds", residual_rounds,
                        "Rounds for --rigidity residual")
            ->capture_default_str();
        cmd->add_option("--ransac-iterations", ransac_iterations,
                        "Three-point consensus iterations")
            ->capture_default_str();
        cmd->add_option("--ransac-threshold", ransac_threshold,
                        "Consensus inlier threshold in meters")
            ->capture_default_str();
        cmd->add_option("--seed", seed, "Seed for every randomized stage")
            ->capture_default_str();
        cmd->add_option("--depth-range", depth_range,
                        "Valid depth window in meters (min max)")
            ->expected(2)
            ->capture_default_str();
        cmd->add_flag("--bilinear-depth", bilinear_depth,
                      "Bilinear target-depth sampling (default nearest)");
        cmd->add_option("--gt-psf-eps", gt_psf_eps,
                        "Rigidity threshold on |projected scene flow| in pixels")
            ->capture_default_str();
    }

    PipelineOptions to_options() const {
        PipelineOptions opts;
        if (rigidity == "all") opts.rigidity_source = RigiditySource::AllRigid;
        else if (rigidity == "gt-psf") opts.rigidity_source = RigiditySource::GtPsf;
        else if (rigidity == "residual") opts.rigidity_source = RigiditySource::Residual;
        else opts.rigidity_source = RigiditySource::External;
        opts.external_mask_path = mask_path;
        if (init == "identity") opts.init = PoseInit::Identity;
        else if (init == "ransac") opts.init = PoseInit::Ransac;
        else opts.init = PoseInit::External;
        if (opts.init == PoseInit::External) {
            if (init_pose_path.empty())
                throw UsageError("--init external requires --init-pose");
            const auto poses = read_trajectory(init_pose_path);
            if (poses.empty())
                throw DataError("initial pose file has no poses: " + init_pose_path);
            opts.external_init = poses.front().second;
        }
        opts.fb_threshold = fb_threshold;
        opts.dilation_patch = dilation;
        opts.sampling.stride = stride;
        opts.sampling.max_points = max_points;
        opts.residual_rounds = residual_rounds;
        opts.gt_psf_eps = gt_psf_eps;
        opts.solver.use_huber = !no_huber;
        if (huber_delta == "auto") {
            opts.solver.auto_huber_delta = true;
        } else {
            opts.solver.huber_delta = std::stod(huber_delta);
        }
        opts.solver.max_iterations = gn_iterations;
        opts.solver.ransac_iterations = ransac_iterations;
        opts.solver.ransac_inlier_threshold = ransac_threshold;
        opts.solver.seed = seed;
        opts.depth_range = std::make_pair(depth_range.at(0), depth_range.at(1));
        opts.depth_sampling =
            bilinear_depth ? DepthSampling::Bilinear : DepthSampling::Nearest;
        return opts;
    }
};

void write_pose_file(const fs::path& path, const RigidTransform& pose) {
    write_trajectory(path, {{0.0, pose}});
}

void write_estimate_outputs(const fs::path& dir, const PipelineResult& result,
                            const PipelineInput& input) {
    fs::create_directories(dir);
    write_pose_file(dir / "pose.txt", result.pose.transform);
    write_flo(dir / "egomotion.flo", result.egomotion);
    write_flo(dir / "projected_scene_flow.flo", result.projected_scene_flow);
    write_sfl(dir / "scene_flow.sfl", result.scene_flow);
    write_mask(dir / "rigidity_used.png", result.rigidity_used);
    write_mask(dir / "fb_rejected.png", result.fb_rejected);

    write_image(dir / "flow_color.png", flow_to_color(input.flow_fwd));
    write_image(dir / "egomotion_color.png", flow_to_color(result.egomotion));
    write_image(dir / "projected_scene_flow_color.png",
                flow_to_color(result.projected_scene_flow));
    if (input.gt) {
        const FlowField ego_gt =
            egomotion_flow(input.intrinsics, input.depth0, input.gt->pose01);
        const BinaryMask all(input.intrinsics.width, input.intrinsics.height, true);
        write_image(dir / "egomotion_error.png",
                    error_heatmap(result.egomotion, ego_gt, all, 1.0));
    }

    if (result.metrics) {
        const EvalReport report = aggregate({*result.metrics});
        std::ofstream out(dir / "metrics.txt");
        out << format_report_keyvalue(report);
    }
}

FramePairMetrics print_summary(const PipelineResult& result) {
    const RigidTransform& t = result.pose.transform;
    std::printf("pose translation [m]: %.9g %.9g %.9g\n", t.translation.x(),
                t.translation.y(), t.translation.z());
    const EulerAngles e = rotation_to_euler(t.rotation);
    std::printf("pose rotation xyz [deg]: %.9g %.9g %.9g\n",
                e.alpha * 180.0 / M_PI, e.beta * 180.0 / M_PI,
                e.gamma * 180.0 / M_PI);
    std::printf("correspondences: %zu  iterations: %d  converged: %s\n",
                result.correspondence_count, result.pose.iterations_used,
                result.pose.converged ? "yes" : "no");
    FramePairMetrics m;
    if (result.metrics) {
        m = *result.metrics;
        std::printf("epe_ef [px]: %.6g  epe_psf [px]: %.6g\n", m.epe_ef, m.epe_psf);
        std::printf("rpe_t [m]: %.6g  rpe_r [deg]: %.6g  miou: %.4f  nr: %.4f\n",
                    m.rpe_t, m.rpe_r, m.rigidity_miou, m.nonrigid_ratio);
    }
    return m;
}

int run_generate(const std::string& out_dir, int count, uint64_t seed,
                 const SceneParams& params, int interval, const NoiseSpec& noise,
                 double depth_scale) {
    if (interval > 0) {
        bool known = false;
        for (int k : kKeyframeIntervals) known = known || k == interval;
        if (!known)
            std::fprintf(stderr, "note: interval %d is outside the standard set\n",
                         interval);
    }
    fs::create_directories(out_dir);
    std::mt19937_64 interval_rng(seed ^ 0x9e3779b97f4a7c15ull);
    for (int i = 0; i < count; ++i) {
        const uint64_t pair_seed = seed + static_cast<uint64_t>(i);
        SceneSpec spec = make_scene(pair_seed, params);
        int delta = interval;
        if (delta <= 0)
            delta = kKeyframeIntervals[interval_rng() %
                                       std::size(kKeyframeIntervals)];
        delta = std::min<int>(delta, static_cast<int>(spec.camera_path.size()) - 1);
        GroundTruthBundle bundle = render_pair(spec, 0, delta);
        if (!noise.is_zero()) {
            NoiseSpec per_pair = noise;
            per_pair.seed = noise.seed + static_cast<uint64_t>(i);
            bundle = perturb(bundle, per_pair);
        }
        char name[32];
        std::snprintf(name, sizeof(name), "pair_%04d", i);
        write_bundle(fs::path(out_dir) / name, bundle, depth_scale);
        std::printf("%s: interval %d, objects %zu\n", name, delta,
                    spec.objects.size());
    }
    return 0;
}

PipelineInput load_input(const std::string& bundle_dir, double depth_scale) {
    return PipelineInput::from_bundle(read_bundle(bundle_dir, depth_scale));
}

PipelineInput load_input_from_files(const std::string& intrinsics_path,
                                    const std::string& depth0_path,
                                    const std::string& depth1_path,
                                    const std::string& flow_path,
                                    const std::string& flow_bwd_path,
                                    const std::string& gt_pose_path,
                                    const std::string& gt_rigidity_path,
                                    double depth_scale) {
    PipelineInput input;
    input.intrinsics = read_intrinsics(intrinsics_path);
    input.depth0 = read_depth(depth0_path, depth_scale);
    input.depth1 = read_depth(depth1_path, depth_scale);
    input.flow_fwd = read_flo(flow_path);
    if (!flow_bwd_path.empty()) input.flow_bwd = read_flo(flow_bwd_path);
    if (!gt_pose_path.empty()) {
        PipelineInput::GroundTruth gt;
        const auto poses = read_trajectory(gt_pose_path);
        if (poses.empty()) throw DataError("no poses in " + gt_pose_path);
        gt.pose01 = poses.front().second;
        const int w = input.intrinsics.width, h = input.intrinsics.height;
        gt.occlusion_fwd = BinaryMask(w, h, false);
        if (!gt_rigidity_path.empty())
            gt.rigidity = load_external_mask(gt_rigidity_path, w, h);
        else
            gt.rigidity = BinaryMask(w, h, true);
        input.gt = std::move(gt);
    }
    return input;
}

int run_evaluate(const std::string& input_dir, const PipelineFlags& flags,
                 double failure_threshold, int jobs, double depth_scale,
                 const std::string& report_path) {
    std::vector<fs::path> bundles;
    for (const auto& entry : fs::directory_iterator(input_dir))
        if (entry.is_directory() && fs::exists(entry.path() / "intrinsics.txt"))
            bundles.push_back(entry.path());
    std::sort(bundles.begin(), bundles.end());
    if (bundles.empty())
        throw InsufficientDataError("no bundle directories under " + input_dir);

    std::vector<FramePairMetrics> metrics(bundles.size());
    std::vector<std::string> errors(bundles.size());
    std::atomic<size_t> next{0};
    const int workers = std::max(1, jobs);
    auto work = [&]() {
        for (size_t i = next.fetch_add(1); i < bundles.size();
             i = next.fetch_add(1)) {
            try {
                const PipelineInput input =
                    load_input(bundles[i].string(), depth_scale);
                const PipelineOptions opts = flags.to_options();
                const PipelineResult result = run_pipeline(input, opts);
                if (!result.metrics)
                    throw UsageError("bundle lacks ground truth for metrics");
                metrics[i] = *result.metrics;
                metrics[i].name = bundles[i].filename().string();
            } catch (const Error& e) {
                errors[i] = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();

    for (size_t i = 0; i < bundles.size(); ++i)
        if (!errors[i].empty())
            throw EstimationFailureError(bundles[i].filename().string() + ": " +
                                         errors[i]);

    const EvalReport report = aggregate(metrics, failure_threshold);
    std::fputs(format_report_table(report).c_str(), stdout);
    if (!report_path.empty()) {
        std::ofstream out(report_path);
        if (!out) throw FormatError("cannot write report " + report_path);
        out << format_report_keyvalue(report);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-view RGB-D motion field estimation"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value file");
    app.fallthrough();

    // generate
    auto* gen = app.add_subcommand("generate", "Render synthetic frame pairs");
    std::string gen_out;
    int gen_count = 1, gen_interval = 0;
    uint64_t gen_seed = 0;
    SceneParams params;
    bool desk_scale = false, fronto = false;
    NoiseSpec noise;
    double depth_scale = kDefaultDepthScale;
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--count", gen_count, "Number of frame pairs")
        ->capture_default_str();
    gen->add_option("--seed", gen_seed, "Base seed")->capture_default_str();
    gen->add_option("--object-mean", params.object_count_mean,
                    "Mean of the object-count distribution")
        ->capture_default_str();
    gen->add_option("--object-sigma", params.object_count_sigma,
                    "Sigma of the object-count distribution")
        ->capture_default_str();
    gen->add_flag("--desk-scale", desk_scale,
                  "Few-object preset (mean 3, sigma 1)");
    gen->add_option("--extent", params.extent, "Lateral scene extent in meters")
        ->capture_default_str();
    gen->add_option("--motion-scale", params.motion_scale,
                    "Object translation per frame in meters")
        ->capture_default_str();
    gen->add_option("--width", params.image_width, "Image width")
        ->capture_default_str();
    gen->add_option("--height", params.image_height, "Image height")
        ->capture_default_str();
    gen->add_option("--focal", params.focal, "Focal length in pixels")
        ->capture_default_str();
    gen->add_option("--frames", params.num_frames, "Camera path length")
        ->capture_default_str();
    gen->add_option("--interval", gen_interval,
                    "Keyframe interval (0 = draw from {1,2,5,10,20})")
        ->capture_default_str();
    gen->add_flag("--fronto-parallel", fronto,
                  "Constant-depth scene family (exact nearest-neighbor lookups)");
    gen->add_option("--noise-flow-sigma", noise.flow_sigma,
                    "Flow noise per component in pixels")
        ->capture_default_str();
    gen->add_option("--noise-depth-rel", noise.depth_sigma_rel,
                    "Relative depth noise")
        ->capture_default_str();
    gen->add_option("--noise-outlier-fraction", noise.outlier_fraction,
                    "Fraction of flow vectors replaced by coherent outliers")
        ->capture_default_str();
    gen->add_option("--noise-outlier-magnitude", noise.outlier_magnitude,
                    "Outlier magnitude bound in pixels")
        ->capture_default_str();
    gen->add_option("--noise-holes", noise.invalid_hole_fraction,
                    "Fraction of depth pixels punched invalid")
        ->capture_default_str();
    gen->add_option("--noise-seed", noise.seed, "Noise seed")->capture_default_str();
    gen->add_option("--depth-scale", depth_scale, "Stored depth units per meter")
        ->capture_default_str();

    // estimate
    auto* est = app.add_subcommand("estimate", "Estimate pose and motion field");
    std::string est_bundle, est_intr, est_depth0, est_depth1, est_flow, est_bwd;
    std::string est_gt_pose, est_gt_rigidity, est_out;
    double est_depth_scale = kDefaultDepthScale;
    bool est_no_metrics = false;
    PipelineFlags est_flags;
    est->add_option("--bundle", est_bundle, "Bundle directory input");
    est->add_option("--intrinsics", est_intr, "Intrinsics file");
    est->add_option("--depth0", est_depth0, "First depth image");
    est->add_option("--depth1", est_depth1, "Second depth image");
    est->add_option("--flow", est_flow, "Forward flow (.flo)");
    est->add_option("--flow-bwd", est_bwd, "Backward flow (.flo)");
    est->add_option("--gt-pose", est_gt_pose,
                    "Ground-truth relative pose (trajectory file)");
    est->add_option("--gt-rigidity", est_gt_rigidity, "Ground-truth rigidity mask");
    est->add_option("--out-dir", est_out, "Directory for result files and images");
    est->add_option("--depth-scale", est_depth_scale, "Stored depth units per meter")
        ->capture_default_str();
    est->add_flag("--no-metrics", est_no_metrics, "Skip metric computation");
    est_flags.attach(est);

    // evaluate
    auto* eva = app.add_subcommand("evaluate", "Batch-evaluate bundle directories");
    std::string eva_input, eva_report;
    double eva_failure = 100.0, eva_depth_scale = kDefaultDepthScale;
    int eva_jobs = 1;
    PipelineFlags eva_flags;
    eva->add_option("--input", eva_input, "Directory of bundle subdirectories")
        ->required();
    eva->add_option("--failure-threshold", eva_failure,
                    "End-point error above which a pair counts as a failure")
        ->capture_default_str();
    eva->add_option("--jobs", eva_jobs, "Concurrent bundle workers")
        ->capture_default_str();
    eva->add_option("--report", eva_report, "Write the key=value report here");
    eva->add_option("--depth-scale", eva_depth_scale, "Stored depth units per meter")
        ->capture_default_str();
    eva_flags.attach(eva);

    // visualize
    auto* vis = app.add_subcommand("visualize", "Render flow and error images");
    std::string vis_flow, vis_out, vis_est, vis_gt, vis_valid;
    double vis_max = 0.0, vis_cap = 1.0;
    vis->add_option("--flow", vis_flow, "Flow field (.flo) to color-code");
    vis->add_option("--out", vis_out, "Output image path")->required();
    vis->add_option("--max-magnitude", vis_max,
                    "Magnitude mapped to full saturation (0 = auto)")
        ->capture_default_str();
    vis->add_option("--est", vis_est, "Estimated flow for an error heatmap");
    vis->add_option("--gt", vis_gt, "Reference flow for an error heatmap");
    vis->add_option("--valid", vis_valid, "Validity mask image");
    vis->add_option("--cap", vis_cap, "Error mapped to full intensity")
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitUsage;
    }

    try {
        if (gen->parsed()) {
            if (desk_scale) {
                params.object_count_mean = 3.0;
                params.object_count_sigma = 1.0;
            }
            params.fronto_parallel = fronto;
            return run_generate(gen_out, gen_count, gen_seed, params, gen_interval,
                                noise, depth_scale);
        }
        if (est->parsed()) {
            PipelineInput input;
            if (!est_bundle.empty()) {
                input = load_input(est_bundle, est_depth_scale);
            } else {
                if (est_intr.empty() || est_depth0.empty() || est_depth1.empty() ||
                    est_flow.empty())
                    throw UsageError(
                        "estimate needs --bundle or --intrinsics/--depth0/"
                        "--depth1/--flow");
                input = load_input_from_files(est_intr, est_depth0, est_depth1,
                                              est_flow, est_bwd, est_gt_pose,
                                              est_gt_rigidity, est_depth_scale);
            }
            PipelineOptions opts = est_flags.to_options();
            opts.compute_metrics = !est_no_metrics;
            const PipelineResult result = run_pipeline(input, opts);
            print_summary(result);
            if (!est_out.empty()) write_estimate_outputs(est_out, result, input);
            return 0;
        }
        if (eva->parsed()) {
            return run_evaluate(eva_input, eva_flags, eva_failure, eva_jobs,
                                eva_depth_scale, eva_report);
        }
        if (vis->parsed()) {
            if (!vis_est.empty() || !vis_gt.empty()) {
                if (vis_est.empty() || vis_gt.empty())
                    throw UsageError("heatmap needs both --est and --gt");
                const FlowField est_f = read_flo(vis_est);
                const FlowField gt_f = read_flo(vis_gt);
                BinaryMask valid(est_f.width(), est_f.height(), true);
                if (!vis_valid.empty())
                    valid = load_external_mask(vis_valid, est_f.width(),
                                               est_f.height());
                write_image(vis_out, error_heatmap(est_f, gt_f, valid, vis_cap));
            } else {
                if (vis_flow.empty())
                    throw UsageError("visualize needs --flow or --est/--gt");
                const FlowField flow = read_flo(vis_flow);
                write_image(vis_out,
                            flow_to_color(flow, vis_max > 0.0
                                                    ? std::optional<double>(vis_max)
                                                    : std::nullopt));
            }
            return 0;
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const DomainError& e) {
        std::fprintf(stderr, "usage error: %s\n", e.what());
        return kExitUsage;
    } catch (const FormatError& e) {
        std::fprintf(stderr, "format error: %s\n", e.what());
        return kExitFormat;
    } catch (const DataError& e) {
        std::fprintf(stderr, "data error: %s\n", e.what());
        return kExitFormat;
    } catch (const InsufficientDataError& e) {
        std::fprintf(stderr, "insufficient data: %s\n", e.what());
        return kExitInsufficientData;
    } catch (const DegenerateGeometryError& e) {
        std::fprintf(stderr, "estimation failure: %s\n", e.what());
        return kExitEstimationFailure;
    } catch (const EstimationFailureError& e) {
        std::fprintf(stderr, "estimation failure: %s\n", e.what());
        return kExitEstimationFailure;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
