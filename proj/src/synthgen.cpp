#include "sceneflow/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sceneflow/errors.hpp"

namespace sceneflow {

namespace {

constexpr double kRayMin = 1e-9;
// A nearest-pixel depth lookup farther off than this marks the forward
// correspondence as unobservable in the second frame.
constexpr double kOcclusionMargin = 5e-7;

struct Ray {
    Vec3 origin;
    Vec3 dir;  // camera-frame z component is 1, so t equals depth
};

std::optional<double> intersect_local(const PlaneShape&, const Ray& ray) {
    if (std::abs(ray.dir.z()) < 1e-15) return std::nullopt;
    const double t = -ray.origin.z() / ray.dir.z();
    if (t <= kRayMin) return std::nullopt;
    return t;
}

std::optional<double> intersect_local(const SphereShape& s, const Ray& ray) {
    const double a = ray.dir.squaredNorm();
    const double b = 2.0 * ray.origin.dot(ray.dir);
    const double c = ray.origin.squaredNorm() - s.radius * s.radius;
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    const double t0 = (-b - sq) / (2.0 * a);
    if (t0 > kRayMin) return t0;
    const double t1 = (-b + sq) / (2.0 * a);
    if (t1 > kRayMin) return t1;
    return std::nullopt;
}

std::optional<double> intersect_local(const BoxShape& box, const Ray& ray) {
    double tmin = -std::numeric_limits<double>::infinity();
    double tmax = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
        const double lo = -box.half_extent(a), hi = box.half_extent(a);
        if (std::abs(ray.dir(a)) < 1e-15) {
            if (ray.origin(a) < lo || ray.origin(a) > hi) return std::nullopt;
            continue;
        }
        double t0 = (lo - ray.origin(a)) / ray.dir(a);
        double t1 = (hi - ray.origin(a)) / ray.dir(a);
        if (t0 > t1) std::swap(t0, t1);
        tmin = std::max(tmin, t0);
        tmax = std::min(tmax, t1);
        if (tmin > tmax) return std::nullopt;
    }
    if (tmin > kRayMin) return tmin;
    if (tmax > kRayMin) return tmax;
    return std::nullopt;
}

struct Hit {
    double t = 0.0;
    int owner = -1;  // -1 background, otherwise object index
};

RigidTransform integer_power(const RigidTransform& step, int k) {
    RigidTransform base = k >= 0 ? step : step.inverse();
    int n = std::abs(k);
    RigidTransform out = RigidTransform::identity();
    for (int i = 0; i < n; ++i) out = base * out;
    return out;
}

// Scene frozen at one frame index, with cached world->local transforms.
struct FrameGeometry {
    const SceneSpec* spec = nullptr;
    std::vector<RigidTransform> world_to_local_bg;
    std::vector<RigidTransform> world_to_local_obj;

    FrameGeometry(const SceneSpec& s, int frame) : spec(&s) {
        for (const auto& prim : s.background)
            world_to_local_bg.push_back(prim.pose.inverse());
        for (const auto& obj : s.objects) {
            const RigidTransform pose_k =
                integer_power(obj.step, frame) * obj.primitive.pose;
            world_to_local_obj.push_back(pose_k.inverse());
        }
    }

    std::optional<Hit> cast(const Ray& ray) const {
        std::optional<Hit> best;
        auto consider = [&](std::optional<double> t, int owner) {
            if (t && (!best || *t < best->t)) best = Hit{*t, owner};
        };
        for (size_t i = 0; i < spec->background.size(); ++i) {
            Ray local;
            local.origin = world_to_local_bg[i].apply(ray.origin);
            local.dir = world_to_local_bg[i].rotation * ray.dir;
            consider(std::visit([&](const auto& sh) { return intersect_local(sh, local); },
                                spec->background[i].shape),
                     -1);
        }
        for (size_t i = 0; i < spec->objects.size(); ++i) {
            Ray local;
            local.origin = world_to_local_obj[i].apply(ray.origin);
            local.dir = world_to_local_obj[i].rotation * ray.dir;
            consider(std::visit([&](const auto& sh) { return intersect_local(sh, local); },
                                spec->objects[i].primitive.shape),
                     static_cast<int>(i));
        }
        return best;
    }
};

Ray pixel_ray(const Intrinsics& intr, const RigidTransform& cam_to_world, double u,
              double v) {
    const Vec3 dir_cam((u - intr.cx) / intr.fx, (v - intr.cy) / intr.fy, 1.0);
    return {cam_to_world.translation, cam_to_world.rotation * dir_cam};
}

DepthMap render_depth(const SceneSpec& spec, const FrameGeometry& geom,
                      const RigidTransform& cam_to_world) {
    const Intrinsics& intr = spec.intrinsics;
    DepthMap depth(intr.width, intr.height, 0.0);
    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            const auto hit = geom.cast(pixel_ray(intr, cam_to_world, x, y));
            if (hit) depth(x, y) = hit->t;
        }
    }
    return depth;
}

// One direction of the flow/occlusion pass: rays from `src` frame, motion
// taken to `dst` frame.
void render_direction(const SceneSpec& spec, int src_frame, int dst_frame,
                      const FrameGeometry& src_geom, const DepthMap& dst_depth,
                      FlowField& flow, BinaryMask* occlusion, BinaryMask* rigidity,
                      BinaryMask* valid, SceneFlowField* scene_flow) {
    const Intrinsics& intr = spec.intrinsics;
    const RigidTransform& cam_src = spec.camera_path[src_frame];
    const RigidTransform& cam_dst = spec.camera_path[dst_frame];
    const RigidTransform src_to_world = cam_src.inverse();
    const int delta = dst_frame - src_frame;

    for (int y = 0; y < intr.height; ++y) {
        for (int x = 0; x < intr.width; ++x) {
            const Ray ray = pixel_ray(intr, src_to_world, x, y);
            const auto hit = src_geom.cast(ray);
            if (!hit) {
                flow.set_invalid(x, y);
                if (occlusion) occlusion->set(x, y, true);
                if (valid) valid->set(x, y, false);
                if (rigidity) rigidity->set(x, y, false);
                if (scene_flow) scene_flow->set_invalid(x, y);
                continue;
            }
            if (valid) valid->set(x, y, true);
            if (rigidity) rigidity->set(x, y, hit->owner < 0);

            const Vec3 x0_world = ray.origin + hit->t * ray.dir;
            Vec3 x1_world = x0_world;
            if (hit->owner >= 0)
                x1_world =
                    integer_power(spec.objects[hit->owner].step, delta).apply(x0_world);

            if (scene_flow)
                (*scene_flow)(x, y) = cam_src.rotation * (x1_world - x0_world);

            const Vec3 x1_cam = cam_dst.apply(x1_world);
            if (x1_cam.z() <= 0.0) {
                flow.set_invalid(x, y);
                if (occlusion) occlusion->set(x, y, true);
                continue;
            }
            const double u1 = intr.fx * x1_cam.x() / x1_cam.z() + intr.cx;
            const double v1 = intr.fy * x1_cam.y() / x1_cam.z() + intr.cy;
            flow(x, y) = Vec2(u1 - x, v1 - y);

            if (occlusion) {
                bool occ = !intr.contains_rounded(u1, v1);
                if (!occ) {
                    const int tx = static_cast<int>(std::lround(u1));
                    const int ty = static_cast<int>(std::lround(v1));
                    occ = !dst_depth.valid(tx, ty) ||
                          std::abs(dst_depth(tx, ty) - x1_cam.z()) > kOcclusionMargin;
                }
                occlusion->set(x, y, occ);
            }
        }
    }
}

}  // namespace

GroundTruthBundle render_pair(const SceneSpec& spec, int frame_i, int frame_j) {
    const int n = static_cast<int>(spec.camera_path.size());
    if (frame_i == frame_j) throw UsageError("render_pair: frame indices must differ");
    if (frame_i < 0 || frame_j < 0 || frame_i >= n || frame_j >= n)
        throw UsageError("render_pair: frame index outside camera path");
    if (!spec.intrinsics.valid()) throw UsageError("render_pair: invalid intrinsics");
    if (spec.background.empty())
        throw UsageError("render_pair: scene needs at least one background primitive");

    const Intrinsics& intr = spec.intrinsics;
    GroundTruthBundle b;
    b.intrinsics = intr;
    b.pose01 = spec.camera_path[frame_j] * spec.camera_path[frame_i].inverse();

    FrameGeometry geom_i(spec, frame_i);
    FrameGeometry geom_j(spec, frame_j);
    b.depth0 = render_depth(spec, geom_i, spec.camera_path[frame_i].inverse());
    b.depth1 = render_depth(spec, geom_j, spec.camera_path[frame_j].inverse());

    b.flow_fwd = FlowField(intr.width, intr.height);
    b.flow_bwd = FlowField(intr.width, intr.height);
    b.rigidity = BinaryMask(intr.width, intr.height);
    b.occlusion_fwd = BinaryMask(intr.width, intr.height);
    b.valid = BinaryMask(intr.width, intr.height);
    b.scene_flow = SceneFlowField(intr.width, intr.height);

    render_direction(spec, frame_i, frame_j, geom_i, b.depth1, b.flow_fwd,
                     &b.occlusion_fwd, &b.rigidity, &b.valid, &b.scene_flow);
    render_direction(spec, frame_j, frame_i, geom_j, b.depth0, b.flow_bwd, nullptr,
                     nullptr, nullptr, nullptr);
    return b;
}

namespace {

Vec3 random_unit(std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vec3 v(g(rng), g(rng), g(rng));
    const double n = v.norm();
    return n > 1e-12 ? Vec3(v / n) : Vec3(0, 0, 1);
}

}  // namespace

SceneSpec make_scene(uint64_t seed, const SceneParams& params) {
    if (!(params.extent > 0.0)) throw UsageError("make_scene: extent must be > 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    SceneSpec spec;
    spec.intrinsics.fx = spec.intrinsics.fy = params.focal;
    spec.intrinsics.width = params.image_width;
    spec.intrinsics.height = params.image_height;
    spec.intrinsics.cx = 0.5 * (params.image_width - 1);
    spec.intrinsics.cy = 0.5 * (params.image_height - 1);

    // Background plane facing the camera. General scenes tilt it; the
    // fronto-parallel family keeps it at constant depth.
    {
        const double depth = 2.5 + 1.5 * unit(rng);
        Primitive plane;
        plane.shape = PlaneShape{};
        RigidTransform pose;
        if (params.fronto_parallel) {
            pose.rotation = Mat3::Identity();
        } else {
            const double tilt_x = (unit(rng) - 0.5) * 0.5;  // up to ~14 deg
            const double tilt_y = (unit(rng) - 0.5) * 0.5;
            pose.rotation = rotation_about_x(tilt_x) * rotation_about_y(tilt_y);
        }
        pose.translation = Vec3(0, 0, depth);
        plane.pose = pose;
        spec.background.push_back(plane);
    }

    // Camera path: cumulative extrinsics, frame 0 at identity.
    spec.camera_path.push_back(RigidTransform::identity());
    const double rot_step = params.camera_rotation_deg * M_PI / 180.0;
    const Vec3 cam_axis = params.fronto_parallel ? Vec3(0, 0, 1) : random_unit(rng);
    const double cam_angle = rot_step * (0.5 + unit(rng));
    Vec3 cam_t = params.camera_translation * random_unit(rng);
    if (params.fronto_parallel) cam_t.z() *= 0.25;  // keep depth changes gentle
    RigidTransform cam_step;
    cam_step.rotation = rotation_from_axis_angle(cam_axis * cam_angle);
    cam_step.translation = cam_t;
    for (int k = 1; k < std::max(2, params.num_frames); ++k)
        spec.camera_path.push_back(cam_step * spec.camera_path.back());

    // Object count: round(max(0, N(mean, sigma))).
    const double raw =
        params.object_count_mean + params.object_count_sigma * gauss(rng);
    const int count = static_cast<int>(std::lround(std::max(0.0, raw)));

    const Intrinsics& intr = spec.intrinsics;

    // Static clutter at staggered depths in front of the wall. A lone plane
    // leaves a weak rotation/translation gauge for coplanar alignment; real
    // indoor geometry does not.
    {
        SceneSpec wall_only = spec;
        FrameGeometry wall_geom(wall_only, 0);
        const int clutter = 2 + static_cast<int>(rng() % 3);
        for (int k = 0; k < clutter; ++k) {
            const double px = (0.12 + 0.76 * unit(rng)) * (intr.width - 1);
            const double py = (0.12 + 0.76 * unit(rng)) * (intr.height - 1);
            const Ray ray = pixel_ray(intr, RigidTransform::identity(), px, py);
            const auto wall_hit = wall_geom.cast(ray);
            const double z_wall = wall_hit ? wall_hit->t : 4.0;
            const double z_center =
                std::clamp((0.35 + 0.4 * unit(rng)) * z_wall, 0.7, z_wall - 0.3);
            Primitive prop;
            BoxShape box;
            const double scale = std::min(1.0, params.extent);
            if (params.fronto_parallel) {
                box.half_extent = Vec3((0.08 + 0.16 * unit(rng)) * scale,
                                       (0.08 + 0.16 * unit(rng)) * scale, 0.01);
                prop.pose = RigidTransform::from_translation(ray.origin +
                                                             z_center * ray.dir);
            } else {
                box.half_extent = (0.06 + 0.12 * unit(rng)) * scale *
                                  Vec3(0.6 + 0.8 * unit(rng), 0.6 + 0.8 * unit(rng),
                                       0.6 + 0.8 * unit(rng));
                prop.pose.rotation =
                    rotation_from_axis_angle(random_unit(rng) * (unit(rng) * M_PI));
                prop.pose.translation = ray.origin + z_center * ray.dir;
            }
            prop.shape = box;
            spec.background.push_back(prop);
        }
    }

    const SceneSpec background_only = spec;  // objects not yet placed
    FrameGeometry bg_only(background_only, 0);
    for (int k = 0; k < count; ++k) {
        // Center on a ray through an inset pixel, strictly in front of the
        // background surface along that ray.
        const double px = (0.18 + 0.64 * unit(rng)) * (intr.width - 1);
        const double py = (0.18 + 0.64 * unit(rng)) * (intr.height - 1);
        const Ray ray = pixel_ray(intr, RigidTransform::identity(), px, py);
        const auto bg_hit = bg_only.cast(ray);
        const double z_bg = bg_hit ? bg_hit->t : 4.0;
        const double z_center =
            std::clamp((0.45 + 0.35 * unit(rng)) * z_bg, 0.6, z_bg - 0.35);
        const Vec3 center = ray.origin + z_center * ray.dir;

        MovingObject obj;
        const double scale = std::min(1.0, params.extent);
        if (params.fronto_parallel) {
            // Thin axis-aligned plate: constant-depth front face.
            BoxShape box;
            box.half_extent = Vec3((0.10 + 0.20 * unit(rng)) * scale,
                                   (0.10 + 0.20 * unit(rng)) * scale, 0.01);
            obj.primitive.shape = box;
            obj.primitive.pose = RigidTransform::from_translation(center);
            // Transverse motion only, keeping depth sampling exact.
            const double ang = 2.0 * M_PI * unit(rng);
            obj.step = RigidTransform::from_translation(
                params.motion_scale * Vec3(std::cos(ang), std::sin(ang), 0.0));
        } else {
            if (unit(rng) < 0.5) {
                SphereShape s;
                s.radius = (0.10 + 0.15 * unit(rng)) * scale;
                obj.primitive.shape = s;
                obj.primitive.pose = RigidTransform::from_translation(center);
            } else {
                BoxShape box;
                box.half_extent = (0.08 + 0.12 * unit(rng)) * scale *
                                  Vec3(0.6 + 0.8 * unit(rng), 0.6 + 0.8 * unit(rng),
                                       0.6 + 0.8 * unit(rng));
                obj.primitive.shape = box;
                RigidTransform pose;
                pose.rotation = rotation_from_axis_angle(random_unit(rng) *
                                                         (unit(rng) * M_PI));
                pose.translation = center;
                obj.primitive.pose = pose;
            }
            // Mostly transverse translation plus a small tumble.
            Vec3 t = random_unit(rng);
            t.z() *= 0.3;
            if (t.head<2>().norm() < 0.4) t.x() += 0.6;
            t.normalize();
            obj.step.translation = params.motion_scale * t;
            obj.step.rotation = rotation_from_axis_angle(
                random_unit(rng) * (unit(rng) * 0.02));
        }
        spec.objects.push_back(obj);
    }
    return spec;
}

namespace {

// Smooth unit-variance scalar field: white noise blurred with a separable
// Gaussian, then renormalized empirically.
Grid<double> smooth_noise_field(int w, int h, double sigma_px,
                                std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Grid<double> field(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) field(x, y) = g(rng);
    if (sigma_px > 0.0) {
        const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma_px)));
        std::vector<double> kernel(2 * radius + 1);
        double ksum = 0.0;
        for (int i = -radius; i <= radius; ++i) {
            kernel[i + radius] = std::exp(-0.5 * i * i / (sigma_px * sigma_px));
            ksum += kernel[i + radius];
        }
        for (auto& kv : kernel) kv /= ksum;
        Grid<double> tmp(w, h);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[i + radius] * field(std::clamp(x + i, 0, w - 1), y);
                tmp(x, y) = acc;
            }
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                double acc = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    acc += kernel[i + radius] * tmp(x, std::clamp(y + i, 0, h - 1));
                field(x, y) = acc;
            }
    }
    double mean = 0.0, sq = 0.0;
    const double n = static_cast<double>(w) * h;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            mean += field(x, y);
            sq += field(x, y) * field(x, y);
        }
    mean /= n;
    const double stddev = std::sqrt(std::max(sq / n - mean * mean, 1e-30));
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) field(x, y) = (field(x, y) - mean) / stddev;
    return field;
}

// Marks `target` pixels as blobs (random disks), trimming the last blob so
// the count is exact. Only pixels with eligible(x, y) participate.
template <typename Eligible>
BinaryMask blob_mask(int w, int h, size_t target, std::mt19937_64& rng,
                     double min_radius, double max_radius, Eligible eligible) {
    BinaryMask mask(w, h);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    size_t marked = 0;
    int guard = 0;
    while (marked < target && guard++ < 100000) {
        const int cx = static_cast<int>(unit(rng) * w);
        const int cy = static_cast<int>(unit(rng) * h);
        const double r = min_radius + (max_radius - min_radius) * unit(rng);
        const int ir = static_cast<int>(std::ceil(r));
        for (int dy = -ir; dy <= ir && marked < target; ++dy)
            for (int dx = -ir; dx <= ir && marked < target; ++dx) {
                if (dx * dx + dy * dy > r * r) continue;
                const int x = cx + dx, y = cy + dy;
                if (x < 0 || x >= w || y < 0 || y >= h) continue;
                if (mask.get(x, y) || !eligible(x, y)) continue;
                mask.set(x, y, true);
                ++marked;
            }
    }
    return mask;
}

constexpr double kNoiseSmoothingSigma = 6.0;  // pixels

}  // namespace

GroundTruthBundle perturb(const GroundTruthBundle& bundle, const NoiseSpec& noise) {
    if (noise.is_zero()) return bundle;
    if (noise.flow_sigma < 0 || noise.depth_sigma_rel < 0 ||
        noise.outlier_fraction < 0 || noise.outlier_fraction > 1 ||
        noise.outlier_magnitude < 0 || noise.invalid_hole_fraction < 0 ||
        noise.invalid_hole_fraction > 1)
        throw UsageError("perturb: invalid noise spec");

    GroundTruthBundle out = bundle;
    const int w = bundle.intrinsics.width, h = bundle.intrinsics.height;
    std::mt19937_64 rng(noise.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    if (noise.flow_sigma > 0.0) {
        const Grid<double> nu = smooth_noise_field(w, h, kNoiseSmoothingSigma, rng);
        const Grid<double> nv = smooth_noise_field(w, h, kNoiseSmoothingSigma, rng);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (out.flow_fwd.valid(x, y))
                    out.flow_fwd(x, y) += noise.flow_sigma * Vec2(nu(x, y), nv(x, y));
        // Correlated error in the backward field: the error a consistent
        // estimator would make at the mapped source pixel, negated.
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!out.flow_bwd.valid(x, y)) continue;
                const Vec2& b = bundle.flow_bwd(x, y);
                const int sx = std::clamp(static_cast<int>(std::lround(x + b.x())), 0,
                                          w - 1);
                const int sy = std::clamp(static_cast<int>(std::lround(y + b.y())), 0,
                                          h - 1);
                out.flow_bwd(x, y) -=
                    noise.flow_sigma * Vec2(nu(sx, sy), nv(sx, sy));
            }
    }

    if (noise.outlier_fraction > 0.0) {
        size_t valid_count = 0;
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) valid_count += bundle.flow_fwd.valid(x, y);
        const size_t target =
            static_cast<size_t>(std::llround(noise.outlier_fraction * valid_count));
        const BinaryMask blobs =
            blob_mask(w, h, target, rng, 5.0, 9.0,
                      [&](int x, int y) { return bundle.flow_fwd.valid(x, y); });
        // Per-blob coherent wrong motion, mirrored into the backward field so
        // the corruption is round-trip consistent. Connected blob pixels share
        // the vector of the first one visited.
        Grid<uint8_t> assigned(w, h, 0);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                if (!blobs.get(x, y) || assigned(x, y)) continue;
                const double ang = 2.0 * M_PI * unit(rng);
                const double mag = (0.5 + 0.5 * unit(rng)) * noise.outlier_magnitude;
                const Vec2 v(mag * std::cos(ang), mag * std::sin(ang));
                // Flood the connected component (4-neighborhood).
                std::vector<std::pair<int, int>> stack{{x, y}};
                while (!stack.empty()) {
                    auto [px, py] = stack.back();
                    stack.pop_back();
                    if (px < 0 || px >= w || py < 0 || py >= h) continue;
                    if (!blobs.get(px, py) || assigned(px, py)) continue;
                    assigned(px, py) = 1;
                    out.flow_fwd(px, py) = v;
                    const int tx = static_cast<int>(std::lround(px + v.x()));
                    const int ty = static_cast<int>(std::lround(py + v.y()));
                    if (tx >= 0 && tx < w && ty >= 0 && ty < h)
                        out.flow_bwd(tx, ty) = -v;
                    stack.push_back({px + 1, py});
                    stack.push_back({px - 1, py});
                    stack.push_back({px, py + 1});
                    stack.push_back({px, py - 1});
                }
            }
    }

    if (noise.depth_sigma_rel > 0.0) {
        auto add_depth_noise = [&](DepthMap& d) {
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    if (d.valid(x, y))
                        d(x, y) *= std::max(0.05, 1.0 + noise.depth_sigma_rel *
                                                            gauss(rng));
        };
        add_depth_noise(out.depth0);
        add_depth_noise(out.depth1);
    }

    if (noise.invalid_hole_fraction > 0.0) {
        auto punch = [&](DepthMap& d) {
            size_t valid_count = 0;
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x) valid_count += d.valid(x, y);
            const size_t target = static_cast<size_t>(
                std::llround(noise.invalid_hole_fraction * valid_count));
            const BinaryMask holes = blob_mask(
                w, h, target, rng, 2.0, 6.0,
                [&](int x, int y) { return d.valid(x, y); });
            for (int y = 0; y < h; ++y)
                for (int x = 0; x < w; ++x)
                    if (holes.get(x, y)) d.set_invalid(x, y);
        };
        punch(out.depth0);
        punch(out.depth1);
    }
    return out;
}

}  // namespace sceneflow
