#pragma once

#include <random>

#include "sceneflow/synthgen.hpp"
#include "sceneflow/transform.hpp"
#include "sceneflow/types.hpp"

namespace sceneflow::testing {

inline Intrinsics simple_intrinsics(double f = 100.0, double c = 50.0, int w = 101,
                                    int h = 101) {
    Intrinsics intr;
    intr.fx = intr.fy = f;
    intr.cx = intr.cy = c;
    intr.width = w;
    intr.height = h;
    return intr;
}

inline RigidTransform random_transform(std::mt19937_64& rng,
                                       double max_angle = 1.0,
                                       double max_translation = 1.0) {
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    Vec3 axis(unit(rng), unit(rng), unit(rng));
    if (axis.norm() < 1e-6) axis = Vec3(0, 0, 1);
    axis.normalize();
    std::uniform_real_distribution<double> mag(0.0, 1.0);
    RigidTransform t;
    t.rotation = rotation_from_axis_angle(axis * (mag(rng) * max_angle));
    t.translation =
        max_translation * Vec3(unit(rng), unit(rng), unit(rng));
    return t;
}

inline Vec3 random_point(std::mt19937_64& rng, double spread = 2.0,
                         double z_min = 0.5, double z_max = 5.0) {
    std::uniform_real_distribution<double> lat(-spread, spread);
    std::uniform_real_distribution<double> dep(z_min, z_max);
    return {lat(rng), lat(rng), dep(rng)};
}

// Random flow field whose components are dyadic rationals (k / 256 with
// |k| <= 2^20), so sums and differences incur no rounding at all.
inline FlowField dyadic_flow(std::mt19937_64& rng, int w, int h) {
    std::uniform_int_distribution<int> k(-(1 << 20), 1 << 20);
    FlowField flow(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            flow(x, y) = Vec2(k(rng) / 256.0, k(rng) / 256.0);
    return flow;
}

// Scene family the exactness tests use: constant-depth background and plates,
// roll-and-translate camera, moderate per-object image motion.
inline SceneParams exact_scene_params() {
    SceneParams p = SceneParams::desk_scale();
    p.fronto_parallel = true;
    p.motion_scale = 0.05;
    return p;
}

}  // namespace sceneflow::testing
