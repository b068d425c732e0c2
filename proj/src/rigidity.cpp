#include "sceneflow/rigidity.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "sceneflow/camera.hpp"
#include "sceneflow/errors.hpp"
#include "sceneflow/io_formats.hpp"

namespace sceneflow {

BinaryMask rigidity_from_gt_psf(const FlowField& psf, double eps) {
    if (eps < 0.0) throw UsageError("rigidity_from_gt_psf: eps must be >= 0");
    BinaryMask rigid(psf.width(), psf.height());
    for (int y = 0; y < psf.height(); ++y)
        for (int x = 0; x < psf.width(); ++x)
            rigid.set(x, y, psf.valid(x, y) && psf(x, y).norm() <= eps);
    return rigid;
}

namespace {

double robust_threshold(std::vector<double> residuals, double k, double floor) {
    if (residuals.empty()) return floor;
    auto median_of = [](std::vector<double>& v) {
        const size_t mid = v.size() / 2;
        std::nth_element(v.begin(), v.begin() + mid, v.end());
        double m = v[mid];
        if (v.size() % 2 == 0)
            m = 0.5 * (m + *std::max_element(v.begin(), v.begin() + mid));
        return m;
    };
    std::vector<double> tmp = residuals;
    const double med = median_of(tmp);
    for (size_t i = 0; i < residuals.size(); ++i)
        tmp[i] = std::abs(residuals[i] - med);
    const double mad = median_of(tmp);
    return std::max(med + k * 1.4826 * mad, floor);
}

}  // namespace

ResidualSegmentationResult rigidity_from_residuals(
    const Intrinsics& intr, const DepthMap& depth0, const DepthMap& depth1,
    const FlowField& fwd, const FlowField& bwd, const SolverConfig& cfg,
    int rounds, const ResidualSegmentationOptions& opts) {
    if (rounds < 1) throw UsageError("rigidity_from_residuals: rounds must be >= 1");
    const int w = intr.width, h = intr.height;

    const BinaryMask fb_rejected = forward_backward_mask(fwd, bwd, opts.fb_threshold);

    // Valid pixels start rigid.
    BinaryMask rigid(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            rigid.set(x, y, depth0.valid(x, y) && fwd.valid(x, y));

    PoseEstimate pose;
    RigidTransform init = RigidTransform::identity();
    for (int round = 0; round < rounds; ++round) {
        const BinaryMask exclusion =
            dilate(BinaryMask::unite(rigid.complement(), fb_rejected),
                   opts.dilation_patch);
        CorrespondenceSet corr = sample_correspondences(
            intr, depth0, depth1, fwd, rigid, exclusion, opts.sampling);
        pose = gauss_newton_refine(corr, init, cfg);
        init = pose.transform;

        // Dense alignment residual |T x0(u) - x1(u)|; pixels without a usable
        // residual (or round-trip rejected) are labeled non-rigid.
        std::vector<double> sample;
        sample.reserve(static_cast<size_t>(w) * h / 4);
        Grid<double> residual(w, h, -1.0);
        for (int y = 0; y < h; ++y) {
            for (int x = 0; x < w; ++x) {
                if (!depth0.valid(x, y) || !fwd.valid(x, y) || fb_rejected.get(x, y))
                    continue;
                const Vec2& f = fwd(x, y);
                const int tx = static_cast<int>(std::lround(x + f.x()));
                const int ty = static_cast<int>(std::lround(y + f.y()));
                if (!depth1.in_bounds(tx, ty) || !depth1.valid(tx, ty)) continue;
                const Vec3 x0 = backproject(intr, Vec2(x, y), depth0(x, y));
                const Vec3 x1 =
                    backproject(intr, Vec2(x + f.x(), y + f.y()), depth1(tx, ty));
                const double r = (pose.transform.apply(x0) - x1).norm();
                residual(x, y) = r;
                sample.push_back(r);
            }
        }
        const double thr = robust_threshold(std::move(sample), opts.mad_k,
                                            opts.min_threshold);
        // Pixels without a measurable residual (round-trip rejected or no
        // target depth) keep their previous label.
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                if (residual(x, y) >= 0.0) rigid.set(x, y, residual(x, y) <= thr);
    }
    return {rigid, pose};
}

BinaryMask load_external_mask(const std::filesystem::path& path, int width,
                              int height) {
    BinaryMask mask = read_mask(path);
    if (mask.width() != width || mask.height() != height)
        throw DataError("external mask size " + std::to_string(mask.width()) + "x" +
                        std::to_string(mask.height()) + " does not match frame " +
                        std::to_string(width) + "x" + std::to_string(height));
    return mask;
}

}  // namespace sceneflow
