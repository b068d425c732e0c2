#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sceneflow/transform.hpp"
#include "sceneflow/types.hpp"

namespace sceneflow {

struct FramePairMetrics {
    std::string name;
    double epe_ef = 0.0;        // pixels
    double epe_psf = 0.0;       // pixels
    double rpe_t = 0.0;         // meters
    double rpe_r = 0.0;         // degrees, Euler-vector norm
    double rpe_r_geodesic = 0.0;  // degrees, auxiliary
    double rigidity_miou = 0.0;
    double nonrigid_ratio = 0.0;
    bool failed = false;
};

// Mean of |est - gt| over pixels that are in `valid` and carry valid flow in
// both fields. Throws InsufficientDataError when no pixel qualifies.
double epe(const FlowField& est, const FlowField& gt, const BinaryMask& valid);

struct RelativePoseError {
    double translation_m = 0.0;
    double rotation_deg = 0.0;           // Euler-vector 2-norm
    double rotation_geodesic_deg = 0.0;  // auxiliary geodesic angle
};

// Error of est against gt: E = gt^-1 * est.
RelativePoseError rpe(const RigidTransform& est, const RigidTransform& gt);

// Mean of the rigid-class and non-rigid-class IoU. A class absent from both
// masks contributes 1.
double mean_iou(const BinaryMask& est, const BinaryMask& gt);

// Fraction of valid pixels labeled non-rigid. `valid` may be null (all pixels
// count). Throws InsufficientDataError when no pixel is valid.
double nonrigid_ratio(const BinaryMask& gt_rigidity,
                      const BinaryMask* valid = nullptr);

// Difficulty bins over the non-rigid ratio.
enum class NonrigidBin { Below10 = 0, Between10And40 = 1, Above40 = 2 };
NonrigidBin nonrigid_bin(double ratio);
const char* nonrigid_bin_name(NonrigidBin bin);

struct MetricAverages {
    int pair_count = 0;      // pairs assigned to this bucket
    int averaged_count = 0;  // non-failed pairs in the averages
    bool has_average = false;
    double epe_ef = 0.0;
    double epe_psf = 0.0;
    double rpe_t = 0.0;
    double rpe_r = 0.0;
    double rigidity_miou = 0.0;
    double nonrigid_ratio = 0.0;
};

struct EvalReport {
    std::vector<FramePairMetrics> pairs;  // with failed flags resolved
    MetricAverages overall;
    MetricAverages bins[3];
    int failure_count = 0;
    double failure_threshold = 100.0;
};

// A pair fails when either end-point error exceeds the threshold (default
// 100); failed pairs are counted and excluded from every average.
EvalReport aggregate(const std::vector<FramePairMetrics>& metrics,
                     double failure_threshold = 100.0);

// Plain-text table of the report.
std::string format_report_table(const EvalReport& report);

// Machine-readable key=value document (one record per pair plus summary).
std::string format_report_keyvalue(const EvalReport& report);

}  // namespace sceneflow
