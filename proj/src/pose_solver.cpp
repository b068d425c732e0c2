#include "sceneflow/pose_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "sceneflow/camera.hpp"
#include "sceneflow/errors.hpp"

namespace sceneflow {

void SolverConfig::validate() const {
    if (!(huber_delta > 0.0)) throw UsageError("solver: huber_delta must be > 0");
    if (max_iterations < 1) throw UsageError("solver: max_iterations must be >= 1");
    if (!(step_tolerance > 0.0)) throw UsageError("solver: step_tolerance must be > 0");
    if (!(ransac_inlier_threshold > 0.0))
        throw UsageError("solver: ransac_inlier_threshold must be > 0");
    if (ransac_iterations < 1)
        throw UsageError("solver: ransac_iterations must be >= 1");
}

namespace {

RigidTransform fit_rigid(const std::vector<const Correspondence*>& pairs) {
    double wsum = 0.0;
    Vec3 c0 = Vec3::Zero(), c1 = Vec3::Zero();
    for (const auto* p : pairs) {
        wsum += p->weight;
        c0 += p->weight * p->x0;
        c1 += p->weight * p->x1;
    }
    if (wsum <= 0.0) throw DegenerateGeometryError("procrustes: non-positive weight sum");
    c0 /= wsum;
    c1 /= wsum;

    Mat3 cov = Mat3::Zero();
    for (const auto* p : pairs)
        cov += p->weight * (p->x1 - c1) * (p->x0 - c0).transpose();

    Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 sv = svd.singularValues();
    // Rank >= 2 is required for a unique rotation; collinear points give
    // rank 1.
    if (sv(1) <= 1e-13 * std::max(sv(0), 1e-300))
        throw DegenerateGeometryError("procrustes: collinear or degenerate points");

    Mat3 d = Mat3::Identity();
    if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
    RigidTransform t;
    t.rotation = svd.matrixU() * d * svd.matrixV().transpose();
    t.translation = c1 - t.rotation * c0;
    return t;
}

std::vector<const Correspondence*> active_pairs(const CorrespondenceSet& corr,
                                                bool inliers_only) {
    std::vector<const Correspondence*> out;
    out.reserve(corr.items.size());
    for (const auto& c : corr.items)
        if (!inliers_only || c.inlier) out.push_back(&c);
    return out;
}

double median_inplace(std::vector<double>& v) {
    if (v.empty()) return 0.0;
    const size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        const double lo = *std::max_element(v.begin(), v.begin() + mid);
        m = 0.5 * (m + lo);
    }
    return m;
}

}  // namespace

RigidTransform procrustes_align(const CorrespondenceSet& corr) {
    auto pairs = active_pairs(corr, false);
    if (pairs.size() < 3)
        throw DegenerateGeometryError("procrustes: need at least 3 pairs");
    return fit_rigid(pairs);
}

PoseEstimate ransac_pose(CorrespondenceSet& corr, const SolverConfig& cfg) {
    cfg.validate();
    const size_t n = corr.items.size();
    if (n < 3) throw InsufficientDataError("ransac: need at least 3 pairs");

    // Canonical ordering: scan order of the source pixels. Seeded draws then
    // index this ordering, so a permuted input yields the same model.
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        const Vec2& pa = corr.items[a].source_pixel;
        const Vec2& pb = corr.items[b].source_pixel;
        if (pa.y() != pb.y()) return pa.y() < pb.y();
        if (pa.x() != pb.x()) return pa.x() < pb.x();
        return a < b;
    });

    std::mt19937_64 rng(cfg.seed);
    const auto draw = [&](size_t bound) { return static_cast<size_t>(rng() % bound); };

    int best_inliers = -1;
    std::vector<char> best_flags(n, 0);
    RigidTransform best_model;

    CorrespondenceSet sample;
    sample.items.resize(3);
    for (int it = 0; it < cfg.ransac_iterations; ++it) {
        size_t i0 = draw(n), i1 = draw(n), i2 = draw(n);
        if (i0 == i1 || i0 == i2 || i1 == i2) continue;
        sample.items[0] = corr.items[order[i0]];
        sample.items[1] = corr.items[order[i1]];
        sample.items[2] = corr.items[order[i2]];
        sample.items[0].weight = sample.items[1].weight = sample.items[2].weight = 1.0;
        RigidTransform model;
        try {
            model = procrustes_align(sample);
        } catch (const DegenerateGeometryError&) {
            continue;
        }
        int inliers = 0;
        std::vector<char> flags(n, 0);
        for (size_t k = 0; k < n; ++k) {
            const auto& c = corr.items[order[k]];
            if ((model.apply(c.x0) - c.x1).norm() <= cfg.ransac_inlier_threshold) {
                flags[order[k]] = 1;
                ++inliers;
            }
        }
        if (inliers > best_inliers) {
            best_inliers = inliers;
            best_flags = flags;
            best_model = model;
        }
    }
    if (best_inliers < 3)
        throw EstimationFailureError("ransac: no model with 3 inliers");

    for (size_t k = 0; k < n; ++k) corr.items[k].inlier = best_flags[k] != 0;
    // Refit over the canonical ordering so the summation order (and thus the
    // bits of the result) does not depend on the input permutation.
    CorrespondenceSet consensus;
    for (size_t k = 0; k < n; ++k)
        if (corr.items[order[k]].inlier) consensus.items.push_back(corr.items[order[k]]);

    PoseEstimate est;
    est.transform = procrustes_align(consensus);
    est.inlier_count = best_inliers;
    est.converged = true;
    est.iterations_used = cfg.ransac_iterations;
    double cost = 0.0;
    for (const auto& c : consensus.items)
        cost += 0.5 * (est.transform.apply(c.x0) - c.x1).squaredNorm();
    est.final_cost = cost;
    return est;
}

Eigen::Matrix<double, 3, 6> residual_jacobian(const RigidTransform& t, const Vec3& x0) {
    // r(xi) = R(omega) * y + nu - x1 with y = T x0, so dr/domega = -[y]x and
    // dr/dnu = I.
    Eigen::Matrix<double, 3, 6> j;
    j.block<3, 3>(0, 0) = -skew(t.apply(x0));
    j.block<3, 3>(0, 3) = Mat3::Identity();
    return j;
}

double pose_cost(const CorrespondenceSet& corr, const RigidTransform& t,
                 const SolverConfig& cfg, double delta) {
    double cost = 0.0;
    for (const auto& c : corr.items) {
        if (!c.inlier) continue;
        const double rn = (t.apply(c.x0) - c.x1).norm();
        if (!std::isfinite(rn)) throw DataError("pose solver: non-finite residual");
        cost += c.weight * (cfg.use_huber ? huber(rn, delta).cost : 0.5 * rn * rn);
    }
    return cost;
}

PoseEstimate gauss_newton_refine(const CorrespondenceSet& corr,
                                 const RigidTransform& init,
                                 const SolverConfig& cfg) {
    cfg.validate();
    auto pairs = active_pairs(corr, true);
    if (pairs.size() < 3)
        throw InsufficientDataError("gauss_newton_refine: need at least 3 pairs");

    double delta = cfg.huber_delta;
    if (cfg.auto_huber_delta && cfg.use_huber) {
        std::vector<double> res;
        res.reserve(pairs.size());
        for (const auto* p : pairs) res.push_back((init.apply(p->x0) - p->x1).norm());
        std::vector<double> tmp = res;
        const double med = median_inplace(tmp);
        for (size_t i = 0; i < res.size(); ++i) tmp[i] = std::abs(res[i] - med);
        delta = std::max(1.4826 * median_inplace(tmp), 1e-6);
    }

    PoseEstimate est;
    est.transform = init;
    est.inlier_count = static_cast<int>(pairs.size());
    double cost = pose_cost(corr, est.transform, cfg, delta);
    est.cost_history.push_back(cost);

    for (int it = 0; it < cfg.max_iterations; ++it) {
        Eigen::Matrix<double, 6, 6> h = Eigen::Matrix<double, 6, 6>::Zero();
        Eigen::Matrix<double, 6, 1> g = Eigen::Matrix<double, 6, 1>::Zero();
        for (const auto* p : pairs) {
            const Vec3 y = est.transform.apply(p->x0);
            const Vec3 r = y - p->x1;
            const double rn = r.norm();
            if (!std::isfinite(rn)) throw DataError("pose solver: non-finite residual");
            const double w =
                p->weight * (cfg.use_huber ? huber(rn, delta).weight : 1.0);
            Eigen::Matrix<double, 3, 6> j;
            j.block<3, 3>(0, 0) = -skew(y);
            j.block<3, 3>(0, 3) = Mat3::Identity();
            h.noalias() += w * j.transpose() * j;
            g.noalias() += w * j.transpose() * r;
        }

        Eigen::LDLT<Eigen::Matrix<double, 6, 6>> ldlt(h);
        if (ldlt.info() != Eigen::Success ||
            ldlt.vectorD().minCoeff() <= 1e-12 * std::max(1.0, ldlt.vectorD().maxCoeff()))
            throw DegenerateGeometryError("gauss_newton_refine: singular normal equations");
        Eigen::Matrix<double, 6, 1> step = -ldlt.solve(g);

        est.iterations_used = it + 1;
        if (!step.allFinite())
            throw DegenerateGeometryError("gauss_newton_refine: non-finite update");

        // Halving line search; reject the iteration if no scale descends.
        double scale = 1.0;
        bool accepted = false;
        for (int bt = 0; bt <= cfg.max_backtrack_steps; ++bt, scale *= 0.5) {
            const Eigen::Matrix<double, 6, 1> s = scale * step;
            RigidTransform inc;
            inc.rotation = rotation_from_axis_angle(s.head<3>());
            inc.translation = s.tail<3>();
            const RigidTransform candidate = inc * est.transform;
            const double new_cost = pose_cost(corr, candidate, cfg, delta);
            if (new_cost <= cost) {
                est.transform = candidate;
                cost = new_cost;
                est.cost_history.push_back(cost);
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            est.converged = true;
            break;
        }
        if ((scale * step).norm() <= cfg.step_tolerance) {
            est.converged = true;
            break;
        }
    }
    est.final_cost = cost;
    return est;
}

}  // namespace sceneflow
