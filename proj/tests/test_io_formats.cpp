#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "sceneflow/errors.hpp"
#include "sceneflow/io_formats.hpp"
#include "sceneflow/synthgen.hpp"

using namespace sceneflow;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "sceneflow_io_test") {
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::vector<char> slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void push_float(std::vector<char>& out, float v) {
    char b[4];
    std::memcpy(b, &v, 4);
    out.insert(out.end(), b, b + 4);
}
void push_int(std::vector<char>& out, int32_t v) {
    char b[4];
    std::memcpy(b, &v, 4);
    out.insert(out.end(), b, b + 4);
}

}  // namespace

TEST_CASE("flo: hand-assembled byte fixture") {
    TempDir tmp;
    // 2x1 field {(1,2),(3,4)}: 28 bytes total.
    std::vector<char> expected;
    push_float(expected, 202021.25f);
    push_int(expected, 2);
    push_int(expected, 1);
    for (float v : {1.f, 2.f, 3.f, 4.f}) push_float(expected, v);
    REQUIRE(expected.size() == 28);

    FlowField field(2, 1);
    field(0, 0) = Vec2(1, 2);
    field(1, 0) = Vec2(3, 4);
    write_flo(tmp.path / "f.flo", field);
    CHECK(slurp(tmp.path / "f.flo") == expected);

    // And the fixture parses back to the field.
    std::ofstream(tmp.path / "fixture.flo", std::ios::binary)
        .write(expected.data(), expected.size());
    const FlowField parsed = read_flo(tmp.path / "fixture.flo");
    REQUIRE(parsed.width() == 2);
    REQUIRE(parsed.height() == 1);
    CHECK(parsed(0, 0) == Vec2(1, 2));
    CHECK(parsed(1, 0) == Vec2(3, 4));
}

TEST_CASE("flo: round trip is byte-stable and value-exact for float data") {
    TempDir tmp;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<float> v(-40.f, 40.f);
    FlowField field(23, 17);
    for (int y = 0; y < 17; ++y)
        for (int x = 0; x < 23; ++x) field(x, y) = Vec2(v(rng), v(rng));
    field.set_invalid(3, 3);

    write_flo(tmp.path / "a.flo", field);
    const FlowField back = read_flo(tmp.path / "a.flo");
    CHECK(back == field);
    CHECK(!back.valid(3, 3));
    write_flo(tmp.path / "b.flo", back);
    CHECK(slurp(tmp.path / "a.flo") == slurp(tmp.path / "b.flo"));
}

TEST_CASE("flo: malformed inputs raise format errors") {
    TempDir tmp;
    SUBCASE("bad sanity value") {
        std::vector<char> bytes;
        push_float(bytes, 12345.0f);
        push_int(bytes, 1);
        push_int(bytes, 1);
        push_float(bytes, 0.f);
        push_float(bytes, 0.f);
        std::ofstream(tmp.path / "bad.flo", std::ios::binary)
            .write(bytes.data(), bytes.size());
        CHECK_THROWS_AS(read_flo(tmp.path / "bad.flo"), FormatError);
    }
    SUBCASE("truncated payload") {
        std::vector<char> bytes;
        push_float(bytes, 202021.25f);
        push_int(bytes, 4);
        push_int(bytes, 4);
        push_float(bytes, 1.f);
        std::ofstream(tmp.path / "short.flo", std::ios::binary)
            .write(bytes.data(), bytes.size());
        CHECK_THROWS_AS(read_flo(tmp.path / "short.flo"), FormatError);
    }
    SUBCASE("non-positive dimensions") {
        std::vector<char> bytes;
        push_float(bytes, 202021.25f);
        push_int(bytes, 0);
        push_int(bytes, 3);
        std::ofstream(tmp.path / "dims.flo", std::ios::binary)
            .write(bytes.data(), bytes.size());
        CHECK_THROWS_AS(read_flo(tmp.path / "dims.flo"), FormatError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_flo(tmp.path / "nope.flo"), FormatError);
    }
}

TEST_CASE("sfl: round trip and channel validation") {
    TempDir tmp;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<float> v(-3.f, 3.f);
    SceneFlowField field(9, 7);
    for (int y = 0; y < 7; ++y)
        for (int x = 0; x < 9; ++x) field(x, y) = Vec3(v(rng), v(rng), v(rng));
    write_sfl(tmp.path / "a.sfl", field);
    CHECK(read_sfl(tmp.path / "a.sfl") == field);

    // Header layout: sanity, width, height, channel count = 3.
    const auto bytes = slurp(tmp.path / "a.sfl");
    REQUIRE(bytes.size() == 16 + 9 * 7 * 3 * 4);
    int32_t channels;
    std::memcpy(&channels, bytes.data() + 12, 4);
    CHECK(channels == 3);

    SUBCASE("flo file is rejected as sfl") {
        FlowField f(2, 2);
        write_flo(tmp.path / "f.flo", f);
        CHECK_THROWS_AS(read_sfl(tmp.path / "f.flo"), FormatError);
    }
}

TEST_CASE("depth: quantization, sentinel, range check") {
    TempDir tmp;
    DepthMap depth(12, 8);
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> dz(0.2, 9.0);
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 12; ++x) depth(x, y) = dz(rng);
    depth(2, 2) = 1.0;  // stored value 5000 at default scale
    depth.set_invalid(5, 5);

    write_depth(tmp.path / "d.png", depth);
    const DepthMap back = read_depth(tmp.path / "d.png");
    REQUIRE(back.width() == 12);
    CHECK(!back.valid(5, 5));
    CHECK(back(2, 2) == doctest::Approx(1.0).epsilon(1e-12));
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 12; ++x)
            if (depth.valid(x, y))
                CHECK(std::abs(back(x, y) - depth(x, y)) <= 0.5 / 5000.0);

    SUBCASE("out-of-range depth on write") {
        DepthMap big(2, 2, 100.0);  // 100 m * 5000 > 65535
        CHECK_THROWS_AS(write_depth(tmp.path / "big.png", big), DataError);
        CHECK_NOTHROW(write_depth(tmp.path / "big_ok.png", big, 100.0));
    }
    SUBCASE("unreadable file") {
        CHECK_THROWS_AS(read_depth(tmp.path / "missing.png"), FormatError);
    }
}

TEST_CASE("mask: round trip and zero/nonzero semantics") {
    TempDir tmp;
    BinaryMask mask(10, 6);
    std::mt19937_64 rng(7);
    std::bernoulli_distribution bit(0.5);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 10; ++x) mask.set(x, y, bit(rng));
    write_mask(tmp.path / "m.png", mask);
    CHECK(read_mask(tmp.path / "m.png") == mask);

    SUBCASE("any nonzero value reads as true") {
        // Hand-written 8-bit PGM with values 0, 7, 255.
        std::ofstream pgm(tmp.path / "t.pgm", std::ios::binary);
        pgm << "P5\n3 1\n255\n";
        const char px[3] = {0, 7, char(255)};
        pgm.write(px, 3);
        pgm.close();
        const BinaryMask m = read_mask(tmp.path / "t.pgm");
        CHECK(!m.get(0, 0));
        CHECK(m.get(1, 0));
        CHECK(m.get(2, 0));
    }
    SUBCASE("unreadable file") {
        CHECK_THROWS_AS(read_mask(tmp.path / "missing.png"), FormatError);
    }
}

TEST_CASE("trajectory: round trip, comments, malformed lines") {
    TempDir tmp;
    std::mt19937_64 rng(8);
    std::vector<std::pair<double, RigidTransform>> poses;
    for (int i = 0; i < 100; ++i)
        poses.emplace_back(0.1 * i, testing::random_transform(rng));
    write_trajectory(tmp.path / "t.txt", poses);
    const auto back = read_trajectory(tmp.path / "t.txt");
    REQUIRE(back.size() == poses.size());
    for (size_t i = 0; i < poses.size(); ++i) {
        CHECK(back[i].first == doctest::Approx(poses[i].first).epsilon(1e-15));
        CHECK((back[i].second.rotation - poses[i].second.rotation)
                  .cwiseAbs()
                  .maxCoeff() < 1e-9);
        CHECK((back[i].second.translation - poses[i].second.translation).norm() <
              1e-9);
    }

    SUBCASE("identity pose line") {
        write_trajectory(tmp.path / "id.txt", {{0.0, RigidTransform::identity()}});
        std::ifstream in(tmp.path / "id.txt");
        std::string line;
        std::getline(in, line);
        CHECK(line == "0 0 0 0 0 0 0 1");
    }
    SUBCASE("comments and blank lines are skipped") {
        std::ofstream out(tmp.path / "c.txt");
        out << "# header\n\n0.5 1 2 3 0 0 0 1\n";
        out.close();
        const auto got = read_trajectory(tmp.path / "c.txt");
        REQUIRE(got.size() == 1);
        CHECK(got[0].first == 0.5);
        CHECK((got[0].second.translation - Vec3(1, 2, 3)).norm() == 0.0);
    }
    SUBCASE("malformed line") {
        std::ofstream(tmp.path / "bad.txt") << "0.5 1 2 3 0 0\n";
        CHECK_THROWS_AS(read_trajectory(tmp.path / "bad.txt"), FormatError);
    }
    SUBCASE("non-unit quaternion") {
        std::ofstream(tmp.path / "q.txt") << "0 0 0 0 0.5 0.5 0.5 0.9\n";
        CHECK_THROWS_AS(read_trajectory(tmp.path / "q.txt"), FormatError);
    }
}

TEST_CASE("intrinsics file: parse and emit") {
    TempDir tmp;
    std::ofstream(tmp.path / "i.txt") << "120 120 80 60 160 120\n";
    const Intrinsics intr = read_intrinsics(tmp.path / "i.txt");
    CHECK(intr.fx == 120);
    CHECK(intr.fy == 120);
    CHECK(intr.cx == 80);
    CHECK(intr.cy == 60);
    CHECK(intr.width == 160);
    CHECK(intr.height == 120);
    write_intrinsics(tmp.path / "o.txt", intr);
    const Intrinsics back = read_intrinsics(tmp.path / "o.txt");
    CHECK(back.fx == intr.fx);
    CHECK(back.width == intr.width);
    CHECK_THROWS_AS(read_intrinsics(tmp.path / "missing.txt"), FormatError);
    std::ofstream(tmp.path / "bad.txt") << "120 120 80\n";
    CHECK_THROWS_AS(read_intrinsics(tmp.path / "bad.txt"), FormatError);
}

TEST_CASE("bundle: directory round trip") {
    TempDir tmp;
    SceneParams params = SceneParams::desk_scale();
    params.motion_scale = 0.05;
    const SceneSpec spec = make_scene(123, params);
    const GroundTruthBundle b = render_pair(spec, 0, 2);
    const fs::path dir = tmp.path / "pair_000";
    write_bundle(dir, b);

    const GroundTruthBundle back = read_bundle(dir);
    CHECK(back.intrinsics.width == b.intrinsics.width);
    CHECK(back.rigidity == b.rigidity);
    CHECK(back.occlusion_fwd == b.occlusion_fwd);
    CHECK(back.valid == b.valid);
    CHECK((back.pose01.translation - b.pose01.translation).norm() < 1e-9);
    CHECK((back.pose01.rotation - b.pose01.rotation).cwiseAbs().maxCoeff() < 1e-9);
    // Flow and scene flow are float-quantized; depth is scale-quantized.
    for (int y = 0; y < b.intrinsics.height; ++y)
        for (int x = 0; x < b.intrinsics.width; ++x) {
            if (b.flow_fwd.valid(x, y))
                CHECK((back.flow_fwd(x, y) - b.flow_fwd(x, y)).norm() < 1e-4);
            if (b.depth0.valid(x, y))
                CHECK(std::abs(back.depth0(x, y) - b.depth0(x, y)) <= 0.5 / 5000.0);
            if (b.scene_flow.valid(x, y))
                CHECK((back.scene_flow(x, y) - b.scene_flow(x, y)).norm() < 1e-4);
        }

    SUBCASE("missing mandatory file") {
        fs::remove(dir / "depth0.png");
        CHECK_THROWS_AS(read_bundle(dir), FormatError);
    }
    SUBCASE("occlusion and valid are optional") {
        fs::remove(dir / "occlusion.png");
        fs::remove(dir / "valid.png");
        const GroundTruthBundle defaulted = read_bundle(dir);
        CHECK(defaulted.occlusion_fwd.count() == 0);
        CHECK(defaulted.valid.count() ==
              static_cast<size_t>(b.intrinsics.width) * b.intrinsics.height);
    }
}
