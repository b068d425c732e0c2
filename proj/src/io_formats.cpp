#include "sceneflow/io_formats.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <Eigen/Geometry>
#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "sceneflow/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "binary flow formats are written little-endian");

namespace sceneflow {

namespace {

constexpr float kFloSanity = 202021.25f;

std::ifstream open_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open " + path.string());
    return in;
}

std::ofstream open_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    return out;
}

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
    out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in, const char* what) {
    T value{};
    in.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in) throw FormatError(std::string("truncated file while reading ") + what);
    return value;
}

void check_flo_header(std::ifstream& in, int& width, int& height,
                      const std::filesystem::path& path) {
    const float sanity = read_raw<float>(in, "sanity value");
    if (sanity != kFloSanity)
        throw FormatError("bad sanity value in " + path.string());
    width = read_raw<int32_t>(in, "width");
    height = read_raw<int32_t>(in, "height");
    if (width <= 0 || height <= 0)
        throw FormatError("non-positive dimensions in " + path.string());
    if (static_cast<int64_t>(width) * height > int64_t{1} << 30)
        throw FormatError("implausible dimensions in " + path.string());
}

}  // namespace

FlowField read_flo(const std::filesystem::path& path) {
    auto in = open_read(path);
    int w = 0, h = 0;
    check_flo_header(in, w, h, path);
    FlowField flow(w, h);
    std::vector<float> row(static_cast<size_t>(w) * 2);
    for (int y = 0; y < h; ++y) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) throw FormatError("truncated payload in " + path.string());
        for (int x = 0; x < w; ++x)
            flow(x, y) = Vec2(row[2 * x], row[2 * x + 1]);
    }
    return flow;
}

void write_flo(const std::filesystem::path& path, const FlowField& flow) {
    if (flow.width() <= 0 || flow.height() <= 0)
        throw UsageError("write_flo: empty field");
    auto out = open_write(path);
    write_raw(out, kFloSanity);
    write_raw(out, static_cast<int32_t>(flow.width()));
    write_raw(out, static_cast<int32_t>(flow.height()));
    std::vector<float> row(static_cast<size_t>(flow.width()) * 2);
    for (int y = 0; y < flow.height(); ++y) {
        for (int x = 0; x < flow.width(); ++x) {
            row[2 * x] = static_cast<float>(flow(x, y).x());
            row[2 * x + 1] = static_cast<float>(flow(x, y).y());
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw FormatError("failed writing " + path.string());
}

SceneFlowField read_sfl(const std::filesystem::path& path) {
    auto in = open_read(path);
    int w = 0, h = 0;
    check_flo_header(in, w, h, path);
    const int32_t channels = read_raw<int32_t>(in, "channel count");
    if (channels != 3)
        throw FormatError("expected 3 channels in " + path.string());
    SceneFlowField field(w, h);
    std::vector<float> row(static_cast<size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) throw FormatError("truncated payload in " + path.string());
        for (int x = 0; x < w; ++x)
            field(x, y) = Vec3(row[3 * x], row[3 * x + 1], row[3 * x + 2]);
    }
    return field;
}

void write_sfl(const std::filesystem::path& path, const SceneFlowField& field) {
    if (field.width() <= 0 || field.height() <= 0)
        throw UsageError("write_sfl: empty field");
    auto out = open_write(path);
    write_raw(out, kFloSanity);
    write_raw(out, static_cast<int32_t>(field.width()));
    write_raw(out, static_cast<int32_t>(field.height()));
    write_raw(out, int32_t{3});
    std::vector<float> row(static_cast<size_t>(field.width()) * 3);
    for (int y = 0; y < field.height(); ++y) {
        for (int x = 0; x < field.width(); ++x) {
            const Vec3& v = field(x, y);
            row[3 * x] = static_cast<float>(v.x());
            row[3 * x + 1] = static_cast<float>(v.y());
            row[3 * x + 2] = static_cast<float>(v.z());
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row.size() * sizeof(float)));
    }
    if (!out) throw FormatError("failed writing " + path.string());
}

DepthMap read_depth(const std::filesystem::path& path, double scale) {
    if (!(scale > 0.0)) throw UsageError("read_depth: scale must be > 0");
    cv::Mat img = cv::imread(path.string(), cv::IMREAD_UNCHANGED);
    if (img.empty()) throw FormatError("cannot read depth image " + path.string());
    if (img.type() != CV_16UC1)
        throw FormatError("depth image must be 16-bit single channel: " +
                          path.string());
    DepthMap depth(img.cols, img.rows);
    for (int y = 0; y < img.rows; ++y)
        for (int x = 0; x < img.cols; ++x) {
            const uint16_t v = img.at<uint16_t>(y, x);
            depth(x, y) = v == 0 ? 0.0 : static_cast<double>(v) / scale;
        }
    return depth;
}

void write_depth(const std::filesystem::path& path, const DepthMap& depth,
                 double scale) {
    if (!(scale > 0.0)) throw UsageError("write_depth: scale must be > 0");
    cv::Mat img(depth.height(), depth.width(), CV_16UC1);
    for (int y = 0; y < depth.height(); ++y)
        for (int x = 0; x < depth.width(); ++x) {
            if (!depth.valid(x, y)) {
                img.at<uint16_t>(y, x) = 0;
                continue;
            }
            const double stored = std::round(depth(x, y) * scale);
            if (stored < 0.0 || stored > 65535.0)
                throw DataError("depth out of encodable range at (" +
                                std::to_string(x) + "," + std::to_string(y) + ")");
            img.at<uint16_t>(y, x) = static_cast<uint16_t>(stored);
        }
    if (!cv::imwrite(path.string(), img))
        throw FormatError("failed writing " + path.string());
}

BinaryMask read_mask(const std::filesystem::path& path) {
    cv::Mat img = cv::imread(path.string(), cv::IMREAD_GRAYSCALE);
    if (img.empty()) throw FormatError("cannot read mask image " + path.string());
    BinaryMask mask(img.cols, img.rows);
    for (int y = 0; y < img.rows; ++y)
        for (int x = 0; x < img.cols; ++x)
            mask.set(x, y, img.at<uint8_t>(y, x) != 0);
    return mask;
}

void write_mask(const std::filesystem::path& path, const BinaryMask& mask) {
    cv::Mat img(mask.height(), mask.width(), CV_8UC1);
    for (int y = 0; y < mask.height(); ++y)
        for (int x = 0; x < mask.width(); ++x)
            img.at<uint8_t>(y, x) = mask.get(x, y) ? 255 : 0;
    if (!cv::imwrite(path.string(), img))
        throw FormatError("failed writing " + path.string());
}

std::vector<std::pair<double, RigidTransform>> read_trajectory(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    std::vector<std::pair<double, RigidTransform>> poses;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        double ts, tx, ty, tz, qx, qy, qz, qw;
        if (!(ls >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
            throw FormatError("malformed trajectory line " + std::to_string(line_no) +
                              " in " + path.string());
        std::string extra;
        if (ls >> extra)
            throw FormatError("trailing tokens on trajectory line " +
                              std::to_string(line_no) + " in " + path.string());
        Eigen::Quaterniond q(qw, qx, qy, qz);
        if (std::abs(q.norm() - 1.0) > 1e-3)
            throw FormatError("non-unit quaternion on line " + std::to_string(line_no) +
                              " in " + path.string());
        q.normalize();
        RigidTransform t;
        t.rotation = q.toRotationMatrix();
        t.translation = Vec3(tx, ty, tz);
        poses.emplace_back(ts, t);
    }
    return poses;
}

void write_trajectory(const std::filesystem::path& path,
                      const std::vector<std::pair<double, RigidTransform>>& poses) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    char buf[512];
    for (const auto& [ts, pose] : poses) {
        Eigen::Quaterniond q(pose.rotation);
        if (std::abs(q.norm() - 1.0) > 1e-3)
            throw DataError("write_trajectory: rotation is not orthonormal");
        q.normalize();
        std::snprintf(buf, sizeof(buf),
                      "%.17g %.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", ts,
                      pose.translation.x(), pose.translation.y(),
                      pose.translation.z(), q.x(), q.y(), q.z(), q.w());
        out << buf;
    }
    if (!out) throw FormatError("failed writing " + path.string());
}

Intrinsics read_intrinsics(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open " + path.string());
    Intrinsics intr;
    if (!(in >> intr.fx >> intr.fy >> intr.cx >> intr.cy >> intr.width >> intr.height))
        throw FormatError("malformed intrinsics in " + path.string());
    if (!intr.valid()) throw FormatError("invalid intrinsics in " + path.string());
    return intr;
}

void write_intrinsics(const std::filesystem::path& path, const Intrinsics& intr) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw FormatError("cannot open " + path.string() + " for writing");
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %d %d\n", intr.fx,
                  intr.fy, intr.cx, intr.cy, intr.width, intr.height);
    out << buf;
    if (!out) throw FormatError("failed writing " + path.string());
}

GroundTruthBundle read_bundle(const std::filesystem::path& dir, double depth_scale) {
    namespace fs = std::filesystem;
    auto require = [&](const char* name) {
        const fs::path p = dir / name;
        if (!fs::exists(p))
            throw FormatError("bundle is missing " + std::string(name) + " in " +
                              dir.string());
        return p;
    };
    GroundTruthBundle b;
    b.intrinsics = read_intrinsics(require("intrinsics.txt"));
    b.depth0 = read_depth(require("depth0.png"), depth_scale);
    b.depth1 = read_depth(require("depth1.png"), depth_scale);
    b.flow_fwd = read_flo(require("flow_fwd.flo"));
    b.flow_bwd = read_flo(require("flow_bwd.flo"));
    b.rigidity = read_mask(require("rigidity.png"));
    b.scene_flow = read_sfl(require("scene_flow.sfl"));
    const auto poses = read_trajectory(require("pose01.txt"));
    if (poses.size() != 1)
        throw FormatError("pose01.txt must contain exactly one pose in " +
                          dir.string());
    b.pose01 = poses[0].second;

    const int w = b.intrinsics.width, h = b.intrinsics.height;
    if (fs::exists(dir / "occlusion.png"))
        b.occlusion_fwd = read_mask(dir / "occlusion.png");
    else
        b.occlusion_fwd = BinaryMask(w, h, false);
    if (fs::exists(dir / "valid.png"))
        b.valid = read_mask(dir / "valid.png");
    else
        b.valid = BinaryMask(w, h, true);

    auto check = [&](int gw, int gh, const char* what) {
        if (gw != w || gh != h)
            throw DataError(std::string(what) + " size does not match intrinsics in " +
                            dir.string());
    };
    check(b.depth0.width(), b.depth0.height(), "depth0");
    check(b.depth1.width(), b.depth1.height(), "depth1");
    check(b.flow_fwd.width(), b.flow_fwd.height(), "flow_fwd");
    check(b.flow_bwd.width(), b.flow_bwd.height(), "flow_bwd");
    check(b.rigidity.width(), b.rigidity.height(), "rigidity");
    check(b.scene_flow.width(), b.scene_flow.height(), "scene_flow");
    check(b.occlusion_fwd.width(), b.occlusion_fwd.height(), "occlusion");
    check(b.valid.width(), b.valid.height(), "valid");
    return b;
}

void write_bundle(const std::filesystem::path& dir, const GroundTruthBundle& bundle,
                  double depth_scale) {
    std::filesystem::create_directories(dir);
    write_intrinsics(dir / "intrinsics.txt", bundle.intrinsics);
    write_depth(dir / "depth0.png", bundle.depth0, depth_scale);
    write_depth(dir / "depth1.png", bundle.depth1, depth_scale);
    write_flo(dir / "flow_fwd.flo", bundle.flow_fwd);
    write_flo(dir / "flow_bwd.flo", bundle.flow_bwd);
    write_mask(dir / "rigidity.png", bundle.rigidity);
    write_mask(dir / "occlusion.png", bundle.occlusion_fwd);
    write_mask(dir / "valid.png", bundle.valid);
    write_sfl(dir / "scene_flow.sfl", bundle.scene_flow);
    write_trajectory(dir / "pose01.txt", {{0.0, bundle.pose01}});
}

void write_image(const std::filesystem::path& path, const Image8& image) {
    cv::Mat img(image.height(), image.width(), CV_8UC3);
    for (int y = 0; y < image.height(); ++y)
        for (int x = 0; x < image.width(); ++x) {
            const auto& rgb = image.pixels(x, y);
            img.at<cv::Vec3b>(y, x) = cv::Vec3b(rgb[2], rgb[1], rgb[0]);  // BGR
        }
    if (!cv::imwrite(path.string(), img))
        throw FormatError("failed writing " + path.string());
}

}  // namespace sceneflow
