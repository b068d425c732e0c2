#pragma once

#include <Eigen/Core>
#include <cmath>
#include <cstdint>

#include "sceneflow/errors.hpp"
#include "sceneflow/grid.hpp"

namespace sceneflow {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Middlebury convention: flow components above this magnitude mark an
// unknown/invalid vector.
inline constexpr double kUnknownFlowThreshold = 1e9;
inline constexpr double kUnknownFlow = 1e10;

struct Intrinsics {
    double fx = 0.0;
    double fy = 0.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 0;
    int height = 0;

    bool valid() const {
        return fx > 0.0 && fy > 0.0 && width >= 1 && height >= 1 &&
               std::isfinite(fx) && std::isfinite(fy) && std::isfinite(cx) &&
               std::isfinite(cy);
    }
    // True when the nearest pixel of (u, v) lies inside the raster.
    bool contains_rounded(double u, double v) const {
        const double ru = std::round(u);
        const double rv = std::round(v);
        return ru >= 0.0 && ru <= width - 1 && rv >= 0.0 && rv <= height - 1;
    }
};

// Per-pixel depth in meters. Non-positive or non-finite entries are invalid.
class DepthMap {
  public:
    DepthMap() = default;
    DepthMap(int width, int height, double fill = 0.0) : grid_(width, height, fill) {}

    int width() const { return grid_.width(); }
    int height() const { return grid_.height(); }
    bool in_bounds(int x, int y) const { return grid_.in_bounds(x, y); }

    double& operator()(int x, int y) { return grid_(x, y); }
    double operator()(int x, int y) const { return grid_(x, y); }

    bool valid(int x, int y) const {
        const double z = grid_(x, y);
        return std::isfinite(z) && z > 0.0;
    }
    void set_invalid(int x, int y) { grid_(x, y) = 0.0; }

    Grid<double>& grid() { return grid_; }
    const Grid<double>& grid() const { return grid_; }
    friend bool operator==(const DepthMap& a, const DepthMap& b) {
        return a.grid_ == b.grid_;
    }

  private:
    Grid<double> grid_;
};

// Per-pixel 2D flow in pixels.
class FlowField {
  public:
    FlowField() = default;
    FlowField(int width, int height, const Vec2& fill = Vec2::Zero())
        : grid_(width, height, fill) {}

    int width() const { return grid_.width(); }
    int height() const { return grid_.height(); }
    bool in_bounds(int x, int y) const { return grid_.in_bounds(x, y); }

    Vec2& operator()(int x, int y) { return grid_(x, y); }
    const Vec2& operator()(int x, int y) const { return grid_(x, y); }

    bool valid(int x, int y) const {
        const Vec2& f = grid_(x, y);
        return std::isfinite(f.x()) && std::isfinite(f.y()) &&
               std::abs(f.x()) < kUnknownFlowThreshold &&
               std::abs(f.y()) < kUnknownFlowThreshold;
    }
    void set_invalid(int x, int y) { grid_(x, y) = Vec2(kUnknownFlow, kUnknownFlow); }

    Grid<Vec2>& grid() { return grid_; }
    const Grid<Vec2>& grid() const { return grid_; }
    friend bool operator==(const FlowField& a, const FlowField& b) {
        return a.grid_ == b.grid_;
    }

  private:
    Grid<Vec2> grid_;
};

// Per-pixel 3-vectors in meters (scene flow, or a point map).
class VectorField3 {
  public:
    VectorField3() = default;
    VectorField3(int width, int height, const Vec3& fill = Vec3::Zero())
        : grid_(width, height, fill) {}

    int width() const { return grid_.width(); }
    int height() const { return grid_.height(); }
    bool in_bounds(int x, int y) const { return grid_.in_bounds(x, y); }

    Vec3& operator()(int x, int y) { return grid_(x, y); }
    const Vec3& operator()(int x, int y) const { return grid_(x, y); }

    bool valid(int x, int y) const {
        const Vec3& v = grid_(x, y);
        return v.allFinite() && v.cwiseAbs().maxCoeff() < kUnknownFlowThreshold;
    }
    void set_invalid(int x, int y) {
        grid_(x, y) = Vec3(kUnknownFlow, kUnknownFlow, kUnknownFlow);
    }

    Grid<Vec3>& grid() { return grid_; }
    const Grid<Vec3>& grid() const { return grid_; }
    friend bool operator==(const VectorField3& a, const VectorField3& b) {
        return a.grid_ == b.grid_;
    }

  private:
    Grid<Vec3> grid_;
};

using SceneFlowField = VectorField3;
using PointMap = VectorField3;

// Per-pixel boolean raster.
class BinaryMask {
  public:
    BinaryMask() = default;
    BinaryMask(int width, int height, bool fill = false)
        : grid_(width, height, fill ? uint8_t{1} : uint8_t{0}) {}

    int width() const { return grid_.width(); }
    int height() const { return grid_.height(); }
    bool in_bounds(int x, int y) const { return grid_.in_bounds(x, y); }

    bool get(int x, int y) const { return grid_(x, y) != 0; }
    void set(int x, int y, bool value) { grid_(x, y) = value ? 1 : 0; }

    size_t count() const {
        size_t n = 0;
        for (int y = 0; y < height(); ++y)
            for (int x = 0; x < width(); ++x) n += grid_(x, y) != 0;
        return n;
    }

    BinaryMask complement() const {
        BinaryMask out(width(), height());
        for (int y = 0; y < height(); ++y)
            for (int x = 0; x < width(); ++x) out.set(x, y, grid_(x, y) == 0);
        return out;
    }

    static BinaryMask unite(const BinaryMask& a, const BinaryMask& b) {
        if (!a.grid_.same_size(b.grid_)) throw UsageError("mask union: size mismatch");
        BinaryMask out(a.width(), a.height());
        for (int y = 0; y < a.height(); ++y)
            for (int x = 0; x < a.width(); ++x)
                out.set(x, y, a.get(x, y) || b.get(x, y));
        return out;
    }

    static BinaryMask intersect(const BinaryMask& a, const BinaryMask& b) {
        if (!a.grid_.same_size(b.grid_)) throw UsageError("mask intersect: size mismatch");
        BinaryMask out(a.width(), a.height());
        for (int y = 0; y < a.height(); ++y)
            for (int x = 0; x < a.width(); ++x)
                out.set(x, y, a.get(x, y) && b.get(x, y));
        return out;
    }

    Grid<uint8_t>& grid() { return grid_; }
    const Grid<uint8_t>& grid() const { return grid_; }
    friend bool operator==(const BinaryMask& a, const BinaryMask& b) {
        return a.grid_ == b.grid_;
    }

  private:
    Grid<uint8_t> grid_;
};

}  // namespace sceneflow
