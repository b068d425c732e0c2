#include <doctest.h>

#include <random>

#include "helpers.hpp"
#include "sceneflow/camera.hpp"
#include "sceneflow/correspondence.hpp"
#include "sceneflow/errors.hpp"
#include "sceneflow/synthgen.hpp"

using namespace sceneflow;
using testing::exact_scene_params;
using testing::simple_intrinsics;

namespace {

// Independent dilation: output set iff any input pixel inside the box.
BinaryMask dilate_bruteforce(const BinaryMask& mask, int patch) {
    const int lo = -(patch / 2), hi = patch - 1 - patch / 2;
    BinaryMask out(mask.width(), mask.height());
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x) {
            bool any = false;
            for (int dy = lo; dy <= hi && !any; ++dy)
                for (int dx = lo; dx <= hi && !any; ++dx) {
                    const int sx = x - dx, sy = y - dy;
                    if (mask.in_bounds(sx, sy) && mask.get(sx, sy)) any = true;
                }
            out.set(x, y, any);
        }
    return out;
}

}  // namespace

TEST_CASE("forward-backward mask: consistent and inconsistent vectors") {
    FlowField fwd(20, 10), bwd(20, 10);
    fwd(2, 5) = Vec2(5, 0);
    bwd(7, 5) = Vec2(-5, 0);
    fwd(3, 5) = Vec2(5, 0);
    bwd(8, 5) = Vec2(-3, 0);  // round trip misses by 2 px
    const BinaryMask rejected = forward_backward_mask(fwd, bwd, 0.75);
    CHECK(!rejected.get(2, 5));
    CHECK(rejected.get(3, 5));

    SUBCASE("out-of-bounds target is rejected") {
        FlowField f(4, 4), b(4, 4);
        f(3, 3) = Vec2(5, 5);
        CHECK(forward_backward_mask(f, b).get(3, 3));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(forward_backward_mask(fwd, FlowField(5, 5)), UsageError);
    }
}

TEST_CASE("dilate matches the brute-force oracle") {
    SUBCASE("empty stays empty") {
        const BinaryMask empty(16, 12);
        CHECK(dilate(empty, 10).count() == 0);
    }
    SUBCASE("single pixel, patch 3 gives a 3x3 block") {
        BinaryMask m(9, 9);
        m.set(4, 4, true);
        const BinaryMask d = dilate(m, 3);
        CHECK(d.count() == 9);
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) CHECK(d.get(4 + dx, 4 + dy));
    }
    SUBCASE("border clipping") {
        BinaryMask m(5, 5);
        m.set(0, 0, true);
        const BinaryMask d = dilate(m, 3);
        CHECK(d.count() == 4);
    }
    SUBCASE("random masks, odd and even patches") {
        std::mt19937_64 rng(3);
        std::bernoulli_distribution bit(0.08);
        for (int trial = 0; trial < 20; ++trial) {
            BinaryMask m(31, 17);
            for (int y = 0; y < 17; ++y)
                for (int x = 0; x < 31; ++x) m.set(x, y, bit(rng));
            for (int patch : {1, 2, 3, 5, 10}) {
                const BinaryMask a = dilate(m, patch);
                const BinaryMask b = dilate_bruteforce(m, patch);
                CHECK(a == b);
                for (int y = 0; y < 17; ++y)
                    for (int x = 0; x < 31; ++x)
                        if (m.get(x, y)) CHECK(a.get(x, y));
            }
        }
    }
    SUBCASE("invalid patch") { CHECK_THROWS_AS(dilate(BinaryMask(3, 3), 0), UsageError); }
}

TEST_CASE("sample_correspondences on an exact generated pair") {
    const SceneSpec spec = make_scene(404, exact_scene_params());
    const GroundTruthBundle b = render_pair(spec, 0, 2);
    const Intrinsics& intr = b.intrinsics;

    const BinaryMask fb = forward_backward_mask(b.flow_fwd, b.flow_bwd, 0.75);
    const BinaryMask exclusion =
        dilate(BinaryMask::unite(b.rigidity.complement(), fb), 10);

    CorrespondenceSet corr = sample_correspondences(intr, b.depth0, b.depth1,
                                                    b.flow_fwd, b.rigidity, exclusion);
    REQUIRE(corr.size() >= 50);
    // Rigid-background pairs satisfy x1 = pose01 * x0 to machine precision on
    // this scene family.
    for (const auto& c : corr.items)
        CHECK((b.pose01.apply(c.x0) - c.x1).norm() < 1e-9);
}

TEST_CASE("sample_correspondences: caps, ordering, and failure modes") {
    const Intrinsics intr = simple_intrinsics(100, 50, 101, 101);
    DepthMap depth0(101, 101), depth1(101, 101, 2.0);
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> dz(1.0, 3.0);
    for (int y = 0; y < 101; ++y)
        for (int x = 0; x < 101; ++x) depth0(x, y) = dz(rng);
    const FlowField zero(101, 101);
    const BinaryMask all_rigid(101, 101, true);
    const BinaryMask none(101, 101, false);

    SUBCASE("cap keeps the closest points") {
        SamplingOptions opts;
        opts.stride = 4;
        opts.max_points = 40;
        const CorrespondenceSet corr = sample_correspondences(
            intr, depth0, depth1, zero, all_rigid, none, opts);
        CHECK(corr.size() == 40);
        double max_kept = 0.0;
        for (const auto& c : corr.items) max_kept = std::max(max_kept, c.x0.z());
        // Every discarded candidate is at least as deep as every kept one.
        const CorrespondenceSet full = sample_correspondences(
            intr, depth0, depth1, zero, all_rigid, none, SamplingOptions{});
        size_t deeper = 0;
        for (const auto& c : full.items) deeper += c.x0.z() >= max_kept;
        CHECK(deeper >= full.size() - 40);
    }
    SUBCASE("deterministic output for identical inputs") {
        const CorrespondenceSet a = sample_correspondences(
            intr, depth0, depth1, zero, all_rigid, none, SamplingOptions{});
        const CorrespondenceSet b = sample_correspondences(
            intr, depth0, depth1, zero, all_rigid, none, SamplingOptions{});
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) {
            CHECK(a.items[i].x0 == b.items[i].x0);
            CHECK(a.items[i].source_pixel == b.items[i].source_pixel);
        }
    }
    SUBCASE("shrinking the rigid mask never adds correspondences") {
        const CorrespondenceSet full = sample_correspondences(
            intr, depth0, depth1, zero, all_rigid, none, SamplingOptions{});
        BinaryMask half(101, 101);
        for (int y = 0; y < 101; ++y)
            for (int x = 0; x < 50; ++x) half.set(x, y, true);
        const CorrespondenceSet sub = sample_correspondences(
            intr, depth0, depth1, zero, half, none, SamplingOptions{});
        CHECK(sub.size() < full.size());
        for (const auto& c : sub.items) CHECK(c.source_pixel.x() < 50);
    }
    SUBCASE("all pixels non-rigid raises insufficient data") {
        const BinaryMask no_rigid(101, 101, false);
        CHECK_THROWS_AS(sample_correspondences(intr, depth0, depth1, zero, no_rigid,
                                               none, SamplingOptions{}),
                        InsufficientDataError);
    }
    SUBCASE("backward pairs double the sample on a static scene") {
        SamplingOptions opts;
        opts.include_backward = true;
        const CorrespondenceSet both = sample_correspondences(
            intr, depth0, depth1, zero, all_rigid, none, opts, &zero);
        const CorrespondenceSet fwd_only = sample_correspondences(
            intr, depth0, depth1, zero, all_rigid, none, SamplingOptions{});
        CHECK(both.size() == 2 * fwd_only.size());
    }
    SUBCASE("defaults") {
        SamplingOptions opts;
        CHECK(opts.stride == 4);
        CHECK(opts.max_points == 10000);
    }
}
