#include "sceneflow/correspondence.hpp"

#include <algorithm>
#include <cmath>

#include "sceneflow/camera.hpp"
#include "sceneflow/errors.hpp"

namespace sceneflow {

BinaryMask forward_backward_mask(const FlowField& fwd, const FlowField& bwd,
                                 double threshold) {
    if (!fwd.grid().same_size(bwd.grid()))
        throw UsageError("forward_backward_mask: dimension mismatch");
    BinaryMask rejected(fwd.width(), fwd.height());
    for (int y = 0; y < fwd.height(); ++y) {
        for (int x = 0; x < fwd.width(); ++x) {
            if (!fwd.valid(x, y)) {
                rejected.set(x, y, true);
                continue;
            }
            const Vec2& f = fwd(x, y);
            const int tx = static_cast<int>(std::lround(x + f.x()));
            const int ty = static_cast<int>(std::lround(y + f.y()));
            if (!bwd.in_bounds(tx, ty) || !bwd.valid(tx, ty)) {
                rejected.set(x, y, true);
                continue;
            }
            rejected.set(x, y, (f + bwd(tx, ty)).norm() > threshold);
        }
    }
    return rejected;
}

BinaryMask dilate(const BinaryMask& mask, int patch) {
    if (patch < 1) throw UsageError("dilate: patch must be >= 1");
    const int lo = -(patch / 2);
    const int hi = patch - 1 - patch / 2;
    const int w = mask.width(), h = mask.height();
    BinaryMask out(w, h);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            if (!mask.get(x, y)) continue;
            const int x0 = std::max(0, x + lo), x1 = std::min(w - 1, x + hi);
            const int y0 = std::max(0, y + lo), y1 = std::min(h - 1, y + hi);
            for (int yy = y0; yy <= y1; ++yy)
                for (int xx = x0; xx <= x1; ++xx) out.set(xx, yy, true);
        }
    }
    return out;
}

namespace {

// Appends the pair at source pixel (x, y) if it passes every filter.
void try_emit(const Intrinsics& intr, const DepthMap& depth_src,
              const DepthMap& depth_dst, const FlowField& flow, int x, int y,
              bool swap_direction, std::vector<Correspondence>& out) {
    if (!depth_src.valid(x, y) || !flow.valid(x, y)) return;
    const Vec2& f = flow(x, y);
    const double u1 = x + f.x();
    const double v1 = y + f.y();
    const int tx = static_cast<int>(std::lround(u1));
    const int ty = static_cast<int>(std::lround(v1));
    if (!depth_dst.in_bounds(tx, ty) || !depth_dst.valid(tx, ty)) return;
    Correspondence c;
    const Vec3 src = backproject(intr, Vec2(x, y), depth_src(x, y));
    const Vec3 dst = backproject(intr, Vec2(u1, v1), depth_dst(tx, ty));
    if (swap_direction) {
        c.x0 = dst;
        c.x1 = src;
        c.source_pixel = Vec2(u1, v1);
    } else {
        c.x0 = src;
        c.x1 = dst;
        c.source_pixel = Vec2(x, y);
    }
    out.push_back(c);
}

}  // namespace

CorrespondenceSet sample_correspondences(const Intrinsics& intr,
                                         const DepthMap& depth0,
                                         const DepthMap& depth1,
                                         const FlowField& fwd,
                                         const BinaryMask& rigid,
                                         const BinaryMask& excluded,
                                         const SamplingOptions& opts,
                                         const FlowField* bwd) {
    const int w = intr.width, h = intr.height;
    if (!depth0.grid().same_size(w, h) || !depth1.grid().same_size(w, h) ||
        !fwd.grid().same_size(w, h) || !rigid.grid().same_size(w, h) ||
        !excluded.grid().same_size(w, h))
        throw UsageError("sample_correspondences: dimension mismatch");
    if (opts.stride < 1) throw UsageError("sample_correspondences: stride must be >= 1");
    if (opts.max_points < 3)
        throw UsageError("sample_correspondences: max_points must be >= 3");
    if (opts.include_backward && bwd == nullptr)
        throw UsageError("sample_correspondences: backward flow missing");

    CorrespondenceSet set;
    for (int y = 0; y < h; y += opts.stride) {
        for (int x = 0; x < w; x += opts.stride) {
            if (!rigid.get(x, y) || excluded.get(x, y)) continue;
            try_emit(intr, depth0, depth1, fwd, x, y, false, set.items);
        }
    }
    if (opts.include_backward) {
        // Frame-1 stride grid; the rigidity/exclusion masks live on frame 0,
        // so gate on the mapped source pixel.
        for (int y = 0; y < h; y += opts.stride) {
            for (int x = 0; x < w; x += opts.stride) {
                if (!bwd->valid(x, y)) continue;
                const Vec2& b = (*bwd)(x, y);
                const int sx = static_cast<int>(std::lround(x + b.x()));
                const int sy = static_cast<int>(std::lround(y + b.y()));
                if (!rigid.in_bounds(sx, sy) || !rigid.get(sx, sy) ||
                    excluded.get(sx, sy))
                    continue;
                try_emit(intr, depth1, depth0, *bwd, x, y, true, set.items);
            }
        }
    }

    if (static_cast<int>(set.items.size()) > opts.max_points) {
        std::stable_sort(set.items.begin(), set.items.end(),
                         [](const Correspondence& a, const Correspondence& b) {
                             return a.x0.z() < b.x0.z();
                         });
        set.items.resize(opts.max_points);
    }
    if (set.items.size() < 3)
        throw InsufficientDataError("sample_correspondences: fewer than 3 pairs");
    return set;
}

}  // namespace sceneflow
