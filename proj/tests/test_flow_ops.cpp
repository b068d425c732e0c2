#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "sceneflow/camera.hpp"
#include "sceneflow/errors.hpp"
#include "sceneflow/flow_ops.hpp"

using namespace sceneflow;
using testing::dyadic_flow;
using testing::simple_intrinsics;

namespace {

DepthMap constant_depth(const Intrinsics& intr, double z) {
    return DepthMap(intr.width, intr.height, z);
}

}  // namespace

TEST_CASE("egomotion flow: identity camera gives zero flow") {
    const Intrinsics intr = simple_intrinsics();
    const FlowField flow =
        egomotion_flow(intr, constant_depth(intr, 2.0), RigidTransform::identity());
    for (int y = 0; y < intr.height; ++y)
        for (int x = 0; x < intr.width; ++x) {
            REQUIRE(flow.valid(x, y));
            CHECK(flow(x, y).norm() < 1e-12);
        }
}

TEST_CASE("egomotion flow: lateral translation on a constant-depth plane") {
    const Intrinsics intr = simple_intrinsics();
    const auto c1 = RigidTransform::from_translation({0.1, 0, 0});
    const FlowField flow = egomotion_flow(intr, constant_depth(intr, 2.0), c1);
    // Expected value from the projection/transform composition itself:
    // project(c1 * backproject(u, 2)) - u, constant over the plane.
    const Vec2 expected =
        project(intr, c1.apply(backproject(intr, {7, 3}, 2.0))) - Vec2(7, 3);
    CHECK(std::abs(expected.x()) == doctest::Approx(5.0));
    CHECK(expected.y() == doctest::Approx(0.0));
    for (int y = 0; y < intr.height; ++y)
        for (int x = 0; x < intr.width; ++x)
            CHECK((flow(x, y) - expected).norm() < 1e-12);
}

TEST_CASE("egomotion flow: invalid depth and behind-camera points") {
    const Intrinsics intr = simple_intrinsics(100, 50, 101, 101);
    DepthMap depth = constant_depth(intr, 1.0);
    depth.set_invalid(3, 4);
    // Pushes every point behind the camera.
    const auto c1 = RigidTransform::from_translation({0, 0, -2.0});
    const FlowField flow = egomotion_flow(intr, depth, c1);
    for (int y = 0; y < intr.height; ++y)
        for (int x = 0; x < intr.width; ++x) CHECK(!flow.valid(x, y));
}

TEST_CASE("scene flow from flow: static world") {
    const Intrinsics intr = simple_intrinsics();
    const DepthMap depth = constant_depth(intr, 2.0);
    const FlowField zero(intr.width, intr.height);
    const SceneFlowField dx = scene_flow_from_flow(intr, depth, depth, zero,
                                                   RigidTransform::identity());
    for (int y = 0; y < intr.height; ++y)
        for (int x = 0; x < intr.width; ++x) {
            REQUIRE(dx.valid(x, y));
            CHECK(dx(x, y).norm() == 0.0);
        }
}

TEST_CASE("scene flow from flow: hand-computed displacement") {
    const Intrinsics intr = simple_intrinsics();
    const DepthMap depth = constant_depth(intr, 2.0);
    FlowField flow(intr.width, intr.height, Vec2(5, 0));
    const SceneFlowField dx = scene_flow_from_flow(intr, depth, depth, flow,
                                                   RigidTransform::identity());
    REQUIRE(dx.valid(50, 50));
    CHECK((dx(50, 50) - Vec3(0.1, 0, 0)).norm() < 1e-12);
}

TEST_CASE("scene flow from flow: out-of-bounds target is invalid") {
    const Intrinsics intr = simple_intrinsics();
    const DepthMap depth = constant_depth(intr, 2.0);
    FlowField flow(intr.width, intr.height, Vec2(0, 0));
    flow(100, 50) = Vec2(10, 0);  // exits the raster
    const SceneFlowField dx = scene_flow_from_flow(intr, depth, depth, flow,
                                                   RigidTransform::identity());
    CHECK(!dx.valid(100, 50));
    CHECK(dx.valid(10, 50));
}

TEST_CASE("projected scene flow: identities and exact arithmetic") {
    std::mt19937_64 rng(17);
    const int w = 32, h = 24;
    const FlowField of = dyadic_flow(rng, w, h);
    const FlowField cm = dyadic_flow(rng, w, h);

    const FlowField psf = projected_scene_flow(of, cm);
    SUBCASE("fully rigid field maps to zero") {
        const FlowField zero = projected_scene_flow(of, of);
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) CHECK(zero(x, y).norm() == 0.0);
    }
    SUBCASE("componentwise subtraction") {
        FlowField a(1, 1, Vec2(5, 0)), b(1, 1, Vec2(3, 0));
        CHECK((projected_scene_flow(a, b)(0, 0) - Vec2(2, 0)).norm() == 0.0);
    }
    SUBCASE("of - psf reproduces cm bitwise on exactly-representable fields") {
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x) {
                CHECK(of(x, y).x() - psf(x, y).x() == cm(x, y).x());
                CHECK(of(x, y).y() - psf(x, y).y() == cm(x, y).y());
                CHECK(psf(x, y).x() + cm(x, y).x() == of(x, y).x());
                CHECK(psf(x, y).y() + cm(x, y).y() == of(x, y).y());
            }
    }
    SUBCASE("invalid pixels propagate") {
        FlowField a = of, b = cm;
        a.set_invalid(3, 3);
        b.set_invalid(5, 5);
        const FlowField p = projected_scene_flow(a, b);
        CHECK(!p.valid(3, 3));
        CHECK(!p.valid(5, 5));
        CHECK(p.valid(1, 1));
    }
    SUBCASE("dimension mismatch is a usage error") {
        CHECK_THROWS_AS(projected_scene_flow(of, FlowField(w + 1, h)), UsageError);
    }
}

TEST_CASE("flow from scene flow: identity configuration") {
    const Intrinsics intr = simple_intrinsics();
    PointMap points(intr.width, intr.height);
    for (int y = 0; y < intr.height; ++y)
        for (int x = 0; x < intr.width; ++x)
            points(x, y) = backproject(intr, Vec2(x, y), 2.0);
    const SceneFlowField dx(intr.width, intr.height);
    const FlowField flow =
        flow_from_scene_flow(intr, RigidTransform::identity(),
                             RigidTransform::identity(), points, dx);
    for (int y = 0; y < intr.height; ++y)
        for (int x = 0; x < intr.width; ++x) CHECK(flow(x, y).norm() < 1e-9);
}

TEST_CASE("flow from scene flow: identity c0 specialization") {
    // With c0 = identity the general form reduces to
    // pi(c1 (x0 + dx)) - pi(x0).
    const Intrinsics intr = simple_intrinsics();
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> small(-0.05, 0.05);
    RigidTransform c1;
    c1.rotation = rotation_about_z(0.01);
    c1.translation = Vec3(0.02, -0.01, 0.005);

    PointMap points(intr.width, intr.height);
    SceneFlowField dx(intr.width, intr.height);
    for (int y = 0; y < intr.height; ++y)
        for (int x = 0; x < intr.width; ++x) {
            points(x, y) = backproject(intr, Vec2(x, y), 1.5 + small(rng));
            dx(x, y) = Vec3(small(rng), small(rng), small(rng));
        }
    const FlowField general = flow_from_scene_flow(
        intr, RigidTransform::identity(), c1, points, dx);
    for (int y = 0; y < intr.height; ++y)
        for (int x = 0; x < intr.width; ++x) {
            const Vec2 direct = project(intr, c1.apply(points(x, y) + dx(x, y))) -
                                project(intr, points(x, y));
            CHECK((general(x, y) - direct).norm() < 1e-12);
        }
}
