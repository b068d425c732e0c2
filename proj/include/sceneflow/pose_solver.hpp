#pragma once

#include <cstdint>

#include "sceneflow/correspondence.hpp"
#include "sceneflow/transform.hpp"

namespace sceneflow {

struct SolverConfig {
    double huber_delta = 0.05;          // meters
    bool auto_huber_delta = false;      // 1.4826 * MAD of the initial residuals
    bool use_huber = true;              // false = plain least squares
    int max_iterations = 30;
    double step_tolerance = 1e-12;
    int max_backtrack_steps = 10;
    int ransac_iterations = 1000;
    double ransac_inlier_threshold = 0.05;  // meters
    uint64_t seed = 0;

    void validate() const;
};

struct PoseEstimate {
    RigidTransform transform;
    double final_cost = 0.0;
    int iterations_used = 0;
    int inlier_count = 0;
    bool converged = false;
    // Cost after each accepted iteration, starting with the initial cost.
    std::vector<double> cost_history;
};

// Closed-form least-squares rigid alignment minimizing sum |T x0 - x1|^2
// (weighted centroids + SVD of the cross-covariance, reflection corrected).
// Throws DegenerateGeometryError for < 3 pairs or a collinear configuration.
RigidTransform procrustes_align(const CorrespondenceSet& corr);

// Three-point consensus search. Samples with the seeded generator over a
// canonical ordering of the pairs (scan order of the source pixels), so the
// result does not depend on input permutation. Marks corr inlier flags for
// the winning model and refits on them. Throws EstimationFailureError when
// no model reaches 3 inliers.
PoseEstimate ransac_pose(CorrespondenceSet& corr, const SolverConfig& cfg);

// Iteratively reweighted Gauss-Newton on the robust objective
// sum_i w_i rho(|T x0_i - x1_i|) over SE(3). The 6-DoF update is a
// left-multiplied (rotation-vector, translation) increment; a halving line
// search keeps the cost non-increasing. Pairs with inlier == false are
// skipped.
PoseEstimate gauss_newton_refine(const CorrespondenceSet& corr,
                                 const RigidTransform& init,
                                 const SolverConfig& cfg);

// Residual Jacobian of r_i = dT(xi) * T * x0_i - x1_i with respect to the
// increment xi = (omega, nu) at xi = 0; used by the solver and verifiable
// against finite differences.
Eigen::Matrix<double, 3, 6> residual_jacobian(const RigidTransform& t, const Vec3& x0);

// Robust cost of corr under pose t with the configured loss.
double pose_cost(const CorrespondenceSet& corr, const RigidTransform& t,
                 const SolverConfig& cfg, double delta);

}  // namespace sceneflow
