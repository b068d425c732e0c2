#include "sceneflow/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "sceneflow/errors.hpp"

namespace sceneflow {

double epe(const FlowField& est, const FlowField& gt, const BinaryMask& valid) {
    if (!est.grid().same_size(gt.grid()) || !est.grid().same_size(valid.grid()))
        throw UsageError("epe: dimension mismatch");
    double sum = 0.0;
    size_t n = 0;
    for (int y = 0; y < est.height(); ++y) {
        for (int x = 0; x < est.width(); ++x) {
            if (!valid.get(x, y) || !est.valid(x, y) || !gt.valid(x, y)) continue;
            sum += (est(x, y) - gt(x, y)).norm();
            ++n;
        }
    }
    if (n == 0) throw InsufficientDataError("epe: no valid pixels");
    return sum / static_cast<double>(n);
}

RelativePoseError rpe(const RigidTransform& est, const RigidTransform& gt) {
    const RigidTransform e = gt.inverse() * est;
    RelativePoseError out;
    out.translation_m = e.translation.norm();
    const EulerAngles angles = rotation_to_euler(e.rotation);
    out.rotation_deg = angles.vec().norm() * 180.0 / M_PI;
    out.rotation_geodesic_deg = rotation_angle(e.rotation) * 180.0 / M_PI;
    return out;
}

double mean_iou(const BinaryMask& est, const BinaryMask& gt) {
    if (!est.grid().same_size(gt.grid())) throw UsageError("mean_iou: dimension mismatch");
    size_t inter[2] = {0, 0};
    size_t uni[2] = {0, 0};
    for (int y = 0; y < est.height(); ++y) {
        for (int x = 0; x < est.width(); ++x) {
            const bool e = est.get(x, y);
            const bool g = gt.get(x, y);
            // class 0 = rigid (true), class 1 = non-rigid (false)
            inter[0] += e && g;
            uni[0] += e || g;
            inter[1] += !e && !g;
            uni[1] += !e || !g;
        }
    }
    double total = 0.0;
    for (int c = 0; c < 2; ++c)
        total += uni[c] == 0 ? 1.0 : static_cast<double>(inter[c]) / uni[c];
    return 0.5 * total;
}

double nonrigid_ratio(const BinaryMask& gt_rigidity, const BinaryMask* valid) {
    if (valid && !valid->grid().same_size(gt_rigidity.grid()))
        throw UsageError("nonrigid_ratio: dimension mismatch");
    size_t total = 0, nonrigid = 0;
    for (int y = 0; y < gt_rigidity.height(); ++y) {
        for (int x = 0; x < gt_rigidity.width(); ++x) {
            if (valid && !valid->get(x, y)) continue;
            ++total;
            nonrigid += !gt_rigidity.get(x, y);
        }
    }
    if (total == 0) throw InsufficientDataError("nonrigid_ratio: no valid pixels");
    return static_cast<double>(nonrigid) / static_cast<double>(total);
}

NonrigidBin nonrigid_bin(double ratio) {
    if (ratio < 0.1) return NonrigidBin::Below10;
    if (ratio <= 0.4) return NonrigidBin::Between10And40;
    return NonrigidBin::Above40;
}

const char* nonrigid_bin_name(NonrigidBin bin) {
    switch (bin) {
        case NonrigidBin::Below10: return "nr<10%";
        case NonrigidBin::Between10And40: return "nr10-40%";
        case NonrigidBin::Above40: return "nr>40%";
    }
    return "?";
}

namespace {

void accumulate(MetricAverages& avg, const FramePairMetrics& m) {
    ++avg.pair_count;
    if (m.failed) return;
    ++avg.averaged_count;
    avg.epe_ef += m.epe_ef;
    avg.epe_psf += m.epe_psf;
    avg.rpe_t += m.rpe_t;
    avg.rpe_r += m.rpe_r;
    avg.rigidity_miou += m.rigidity_miou;
    avg.nonrigid_ratio += m.nonrigid_ratio;
}

void finalize(MetricAverages& avg) {
    if (avg.averaged_count == 0) {
        avg.has_average = false;
        return;
    }
    avg.has_average = true;
    const double n = avg.averaged_count;
    avg.epe_ef /= n;
    avg.epe_psf /= n;
    avg.rpe_t /= n;
    avg.rpe_r /= n;
    avg.rigidity_miou /= n;
    avg.nonrigid_ratio /= n;
}

}  // namespace

EvalReport aggregate(const std::vector<FramePairMetrics>& metrics,
                     double failure_threshold) {
    if (metrics.empty()) throw UsageError("aggregate: need at least one pair");
    EvalReport report;
    report.failure_threshold = failure_threshold;
    report.pairs = metrics;
    for (auto& m : report.pairs) {
        m.failed = m.epe_ef > failure_threshold || m.epe_psf > failure_threshold;
        report.failure_count += m.failed;
        accumulate(report.overall, m);
        accumulate(report.bins[static_cast<int>(nonrigid_bin(m.nonrigid_ratio))], m);
    }
    finalize(report.overall);
    for (auto& b : report.bins) finalize(b);
    return report;
}

namespace {

std::string avg_row(const char* label, const MetricAverages& a) {
    char buf[256];
    if (a.has_average) {
        std::snprintf(buf, sizeof(buf),
                      "%-10s %5d %5d %12.6f %12.6f %12.6g %12.6g %8.4f %8.4f\n",
                      label, a.pair_count, a.averaged_count, a.epe_ef, a.epe_psf,
                      a.rpe_t, a.rpe_r, a.rigidity_miou, a.nonrigid_ratio);
    } else {
        std::snprintf(buf, sizeof(buf), "%-10s %5d %5d %12s\n", label, a.pair_count,
                      a.averaged_count, "(no data)");
    }
    return buf;
}

}  // namespace

std::string format_report_table(const EvalReport& report) {
    std::ostringstream os;
    char buf[320];
    std::snprintf(buf, sizeof(buf), "%-24s %12s %12s %12s %12s %8s %8s %6s\n", "pair",
                  "epe_ef", "epe_psf", "rpe_t", "rpe_r", "miou", "nr", "fail");
    os << buf;
    for (const auto& m : report.pairs) {
        std::snprintf(buf, sizeof(buf),
                      "%-24s %12.6f %12.6f %12.6g %12.6g %8.4f %8.4f %6s\n",
                      m.name.c_str(), m.epe_ef, m.epe_psf, m.rpe_t, m.rpe_r,
                      m.rigidity_miou, m.nonrigid_ratio, m.failed ? "yes" : "no");
        os << buf;
    }
    os << "\n";
    std::snprintf(buf, sizeof(buf), "%-10s %5s %5s %12s %12s %12s %12s %8s %8s\n",
                  "bucket", "pairs", "used", "epe_ef", "epe_psf", "rpe_t", "rpe_r",
                  "miou", "nr");
    os << buf;
    os << avg_row("all", report.overall);
    for (int b = 0; b < 3; ++b)
        os << avg_row(nonrigid_bin_name(static_cast<NonrigidBin>(b)), report.bins[b]);
    std::snprintf(buf, sizeof(buf), "failures (epe > %g): %d of %zu\n",
                  report.failure_threshold, report.failure_count,
                  report.pairs.size());
    os << buf;
    return os.str();
}

namespace {

void kv_metrics(std::ostringstream& os, const std::string& prefix,
                const FramePairMetrics& m) {
    os << prefix << ".name=" << m.name << "\n";
    char buf[64];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << prefix << "." << key << "=" << buf << "\n";
    };
    put("epe_ef", m.epe_ef);
    put("epe_psf", m.epe_psf);
    put("rpe_t", m.rpe_t);
    put("rpe_r", m.rpe_r);
    put("rpe_r_geodesic", m.rpe_r_geodesic);
    put("rigidity_miou", m.rigidity_miou);
    put("nonrigid_ratio", m.nonrigid_ratio);
    os << prefix << ".failed=" << (m.failed ? 1 : 0) << "\n";
}

void kv_averages(std::ostringstream& os, const std::string& prefix,
                 const MetricAverages& a) {
    os << prefix << ".pairs=" << a.pair_count << "\n";
    os << prefix << ".used=" << a.averaged_count << "\n";
    if (!a.has_average) return;
    char buf[64];
    auto put = [&](const char* key, double v) {
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        os << prefix << "." << key << "=" << buf << "\n";
    };
    put("epe_ef", a.epe_ef);
    put("epe_psf", a.epe_psf);
    put("rpe_t", a.rpe_t);
    put("rpe_r", a.rpe_r);
    put("rigidity_miou", a.rigidity_miou);
    put("nonrigid_ratio", a.nonrigid_ratio);
}

}  // namespace

std::string format_report_keyvalue(const EvalReport& report) {
    std::ostringstream os;
    os << "pair_count=" << report.pairs.size() << "\n";
    os << "failure_count=" << report.failure_count << "\n";
    os << "failure_threshold=" << report.failure_threshold << "\n";
    for (size_t i = 0; i < report.pairs.size(); ++i)
        kv_metrics(os, "pair." + std::to_string(i), report.pairs[i]);
    kv_averages(os, "summary.all", report.overall);
    const char* names[3] = {"summary.nr_lt10", "summary.nr_10_40", "summary.nr_gt40"};
    for (int b = 0; b < 3; ++b) kv_averages(os, names[b], report.bins[b]);
    return os.str();
}

}  // namespace sceneflow
