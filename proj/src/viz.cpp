#include "sceneflow/viz.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sceneflow/errors.hpp"

namespace sceneflow {

namespace {

// Standard 55-entry Middlebury color wheel.
struct ColorWheel {
    static constexpr int kRY = 15, kYG = 6, kGC = 4, kCB = 11, kBM = 13, kMR = 6;
    static constexpr int kSize = kRY + kYG + kGC + kCB + kBM + kMR;
    double wheel[kSize][3];

    ColorWheel() {
        int k = 0;
        auto put = [&](double r, double g, double b) {
            wheel[k][0] = r;
            wheel[k][1] = g;
            wheel[k][2] = b;
            ++k;
        };
        for (int i = 0; i < kRY; ++i) put(255, 255.0 * i / kRY, 0);
        for (int i = 0; i < kYG; ++i) put(255 - 255.0 * i / kYG, 255, 0);
        for (int i = 0; i < kGC; ++i) put(0, 255, 255.0 * i / kGC);
        for (int i = 0; i < kCB; ++i) put(0, 255 - 255.0 * i / kCB, 255);
        for (int i = 0; i < kBM; ++i) put(255.0 * i / kBM, 0, 255);
        for (int i = 0; i < kMR; ++i) put(255, 0, 255 - 255.0 * i / kMR);
    }

    // fx, fy pre-normalized to [-1, 1] radius; white at zero.
    std::array<uint8_t, 3> color(double fx, double fy) const {
        const double rad = std::min(std::sqrt(fx * fx + fy * fy), 1.0);
        const double a = std::atan2(-fy, -fx) / M_PI;  // [-1, 1]
        const double fk = (a + 1.0) / 2.0 * (kSize - 1);
        const int k0 = std::min(static_cast<int>(fk), kSize - 1);
        const int k1 = (k0 + 1) % kSize;
        const double f = fk - k0;
        std::array<uint8_t, 3> out;
        for (int b = 0; b < 3; ++b) {
            const double col = (1.0 - f) * wheel[k0][b] / 255.0 +
                               f * wheel[k1][b] / 255.0;
            const double shaded = 1.0 - rad * (1.0 - col);
            out[b] = static_cast<uint8_t>(std::lround(255.0 * shaded));
        }
        return out;
    }
};

const ColorWheel& color_wheel() {
    static const ColorWheel wheel;
    return wheel;
}

}  // namespace

double flow_magnitude_percentile(const FlowField& flow, double percentile) {
    std::vector<double> mags;
    mags.reserve(static_cast<size_t>(flow.width()) * flow.height());
    for (int y = 0; y < flow.height(); ++y)
        for (int x = 0; x < flow.width(); ++x)
            if (flow.valid(x, y)) mags.push_back(flow(x, y).norm());
    if (mags.empty()) return 0.0;
    const double pos = std::clamp(percentile, 0.0, 100.0) / 100.0 *
                       (static_cast<double>(mags.size()) - 1.0);
    const size_t idx = static_cast<size_t>(pos);
    std::nth_element(mags.begin(), mags.begin() + idx, mags.end());
    return mags[idx];
}

Image8 flow_to_color(const FlowField& flow, std::optional<double> max_magnitude) {
    double cap;
    if (max_magnitude) {
        if (!(*max_magnitude > 0.0))
            throw UsageError("flow_to_color: max_magnitude must be > 0");
        cap = *max_magnitude;
    } else {
        cap = std::max(flow_magnitude_percentile(flow, 99.0), 1e-6);
    }
    Image8 img;
    img.pixels = Grid<std::array<uint8_t, 3>>(flow.width(), flow.height(),
                                              {uint8_t{0}, uint8_t{0}, uint8_t{0}});
    const ColorWheel& wheel = color_wheel();
    for (int y = 0; y < flow.height(); ++y)
        for (int x = 0; x < flow.width(); ++x) {
            if (!flow.valid(x, y)) continue;  // stays black
            const Vec2& f = flow(x, y);
            img.pixels(x, y) = wheel.color(f.x() / cap, f.y() / cap);
        }
    return img;
}

Image8 error_heatmap(const FlowField& est, const FlowField& gt,
                     const BinaryMask& valid, double cap) {
    if (!est.grid().same_size(gt.grid()) || !est.grid().same_size(valid.grid()))
        throw UsageError("error_heatmap: dimension mismatch");
    if (!(cap > 0.0)) throw UsageError("error_heatmap: cap must be > 0");
    Image8 img;
    img.pixels = Grid<std::array<uint8_t, 3>>(est.width(), est.height(),
                                              {uint8_t{0}, uint8_t{0}, uint8_t{0}});
    for (int y = 0; y < est.height(); ++y)
        for (int x = 0; x < est.width(); ++x) {
            if (!valid.get(x, y) || !est.valid(x, y) || !gt.valid(x, y)) continue;
            const double err = (est(x, y) - gt(x, y)).norm();
            const auto v = static_cast<uint8_t>(
                std::lround(255.0 * std::min(err / cap, 1.0)));
            img.pixels(x, y) = {v, v, v};
        }
    return img;
}

}  // namespace sceneflow
