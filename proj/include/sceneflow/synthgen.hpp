#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "sceneflow/transform.hpp"
#include "sceneflow/types.hpp"

namespace sceneflow {

// Analytic primitives, defined in their local frame.
struct PlaneShape {};  // plane z = 0, normal +z
struct SphereShape {
    double radius = 1.0;
};
struct BoxShape {
    Vec3 half_extent = Vec3::Ones();  // box [-half_extent, half_extent]
};
using Shape = std::variant<PlaneShape, SphereShape, BoxShape>;

struct Primitive {
    Shape shape;
    RigidTransform pose;  // local -> world
};

// A rigidly moving foreground element. World-frame pose at frame k is
// step^k * pose0.
struct MovingObject {
    Primitive primitive;          // pose at frame 0
    RigidTransform step;          // world-frame motion per frame
};

struct SceneSpec {
    Intrinsics intrinsics;
    std::vector<Primitive> background;      // static, world frame
    std::vector<MovingObject> objects;
    std::vector<RigidTransform> camera_path;  // world -> camera extrinsics per frame
};

// One rendered frame pair with exact ground truth. true in `rigidity` marks
// background ownership; `occlusion_fwd` marks pixels whose correspondence is
// not observable in the second frame (covered, out of view, or inconsistent
// with the discrete second-frame depth raster).
struct GroundTruthBundle {
    Intrinsics intrinsics;
    DepthMap depth0, depth1;
    FlowField flow_fwd, flow_bwd;
    BinaryMask rigidity;
    BinaryMask occlusion_fwd;
    BinaryMask valid;
    RigidTransform pose01;  // camera 0 -> camera 1
    SceneFlowField scene_flow;
};

// Keyframe intervals used to synthesize larger motions from a dense path.
inline constexpr int kKeyframeIntervals[] = {1, 2, 5, 10, 20};

struct SceneParams {
    double object_count_mean = 15.0;
    double object_count_sigma = 5.0;
    double extent = 2.0;        // lateral placement scale, meters
    double motion_scale = 0.04; // object translation per frame, meters

    int image_width = 160;
    int image_height = 120;
    double focal = 120.0;
    int num_frames = 21;

    double camera_translation = 0.012;   // meters per frame
    double camera_rotation_deg = 0.25;   // degrees per frame

    // Restrict the scene to constant-depth surfaces under the camera path
    // (fronto-parallel planes/plates, roll-only camera rotation). Nearest-
    // neighbor depth lookups are then exact, which the exact-recovery tests
    // rely on.
    bool fronto_parallel = false;

    // Desk-scale preset: few objects, same geometry defaults.
    static SceneParams desk_scale() {
        SceneParams p;
        p.object_count_mean = 3.0;
        p.object_count_sigma = 1.0;
        return p;
    }
};

// Deterministic scene synthesis: object count is round(max(0, N(mean, sigma)));
// each object center is placed in free space of the frame-0 frustum (its depth
// strictly less than the background depth along its ray).
SceneSpec make_scene(uint64_t seed, const SceneParams& params = {});

// Renders the (i, j) frame pair. Throws UsageError for i == j or indices
// outside the camera path. Pixels whose ray misses all geometry are invalid.
GroundTruthBundle render_pair(const SceneSpec& spec, int frame_i, int frame_j);

struct NoiseSpec {
    double flow_sigma = 0.0;          // pixels, per component
    double depth_sigma_rel = 0.0;     // relative
    double outlier_fraction = 0.0;    // of valid flow vectors
    double outlier_magnitude = 0.0;   // pixels
    double invalid_hole_fraction = 0.0;
    uint64_t seed = 0;

    bool is_zero() const {
        return flow_sigma == 0.0 && depth_sigma_rel == 0.0 &&
               outlier_fraction == 0.0 && invalid_hole_fraction == 0.0;
    }
};

// Measurement corruption for robustness studies. Flow noise is a smooth
// Gaussian random field (per-component std = flow_sigma) applied to both flow
// directions consistently, the way correlated estimator errors behave;
// outliers are blob-shaped coherent replacements (magnitude <=
// outlier_magnitude) mirrored into the backward field so they survive a
// round-trip check; holes invalidate depth. Ground-truth fields (pose,
// rigidity, scene flow) are untouched. Deterministic per seed; a zero spec
// returns the bundle unchanged.
GroundTruthBundle perturb(const GroundTruthBundle& bundle, const NoiseSpec& noise);

}  // namespace sceneflow
