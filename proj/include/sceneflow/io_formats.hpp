#pragma once

#include <array>
#include <filesystem>
#include <utility>
#include <vector>

#include "sceneflow/synthgen.hpp"
#include "sceneflow/transform.hpp"
#include "sceneflow/types.hpp"

namespace sceneflow {

// Middlebury .flo: little-endian float sanity value 202021.25, int32 width,
// int32 height, then row-major interleaved (u, v) float32. Components with
// magnitude above 1e9 encode unknown flow.
FlowField read_flo(const std::filesystem::path& path);
void write_flo(const std::filesystem::path& path, const FlowField& flow);

// Same framing with an extra int32 channel-count field (= 3) after height and
// three float32 per pixel.
SceneFlowField read_sfl(const std::filesystem::path& path);
void write_sfl(const std::filesystem::path& path, const SceneFlowField& field);

inline constexpr double kDefaultDepthScale = 5000.0;  // stored units per meter

// 16-bit single-channel PNG; stored value round(depth * scale), 0 = invalid.
DepthMap read_depth(const std::filesystem::path& path,
                    double scale = kDefaultDepthScale);
void write_depth(const std::filesystem::path& path, const DepthMap& depth,
                 double scale = kDefaultDepthScale);

// 8-bit single-channel PNG; nonzero = true, writer emits 255.
BinaryMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const BinaryMask& mask);

// Text trajectory: one "timestamp tx ty tz qx qy qz qw" line per pose,
// '#' comment lines ignored.
std::vector<std::pair<double, RigidTransform>> read_trajectory(
    const std::filesystem::path& path);
void write_trajectory(const std::filesystem::path& path,
                      const std::vector<std::pair<double, RigidTransform>>& poses);

// Single-line "fx fy cx cy width height".
Intrinsics read_intrinsics(const std::filesystem::path& path);
void write_intrinsics(const std::filesystem::path& path, const Intrinsics& intr);

// Bundle directory layout: depth0.png, depth1.png, flow_fwd.flo,
// flow_bwd.flo, rigidity.png, occlusion.png, valid.png, pose01.txt,
// scene_flow.sfl, intrinsics.txt. occlusion/valid are optional on read
// (default all-false / all-true).
GroundTruthBundle read_bundle(const std::filesystem::path& dir,
                              double depth_scale = kDefaultDepthScale);
void write_bundle(const std::filesystem::path& dir, const GroundTruthBundle& bundle,
                  double depth_scale = kDefaultDepthScale);

// Lossless 8-bit RGB image (used by the visualization module).
struct Image8 {
    Grid<std::array<uint8_t, 3>> pixels;
    int width() const { return pixels.width(); }
    int height() const { return pixels.height(); }
};
void write_image(const std::filesystem::path& path, const Image8& image);

}  // namespace sceneflow
