#include "ripplekit/flashsim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "json_util.hpp"
#include "ripplekit/error.hpp"

namespace ripplekit {

void FlashModel::validate() const {
    if (!(op_latency > 0.0) || !std::isfinite(op_latency)) {
        throw Error(ErrorKind::invalid_argument, "op_latency must be positive");
    }
    if (!(max_bandwidth > 0.0) || !std::isfinite(max_bandwidth)) {
        throw Error(ErrorKind::invalid_argument, "max_bandwidth must be positive");
    }
    if (queue_depth < 1) throw Error(ErrorKind::invalid_argument, "queue_depth must be >= 1");
    if (bundle_bytes < 1) throw Error(ErrorKind::invalid_argument, "bundle_bytes must be >= 1");
    if (iops_knee_bytes > 0.0) {
        const double derived = derived_knee_bytes();
        if (std::abs(iops_knee_bytes - derived) > 0.2 * derived) {
            throw Error(ErrorKind::invalid_argument,
                        fmt::format("iops_knee_bytes {} inconsistent with op_latency/queue_depth x "
                                    "max_bandwidth = {}",
                                    iops_knee_bytes, derived));
        }
    }
}

std::uint64_t ReadPlan::total_length() const noexcept {
    std::uint64_t sum = 0;
    for (const auto& e : extents) sum += e.length;
    return sum;
}

void ReadPlan::validate() const {
    for (std::size_t k = 0; k < extents.size(); ++k) {
        if (extents[k].length == 0) {
            throw Error(ErrorKind::invalid_argument, fmt::format("extent {} has zero length", k));
        }
        if (k > 0 && extents[k].start < extents[k - 1].end()) {
            throw Error(ErrorKind::invalid_argument,
                        fmt::format("extent {} overlaps or precedes extent {}", k, k - 1));
        }
    }
    if (total_length() < activated_neurons) {
        throw Error(ErrorKind::invalid_argument, "extents cover fewer bundles than were demanded");
    }
}

namespace {

double command_term(const ReadPlan& plan, const FlashModel& model) {
    return static_cast<double>(plan.extents.size()) * model.command_time();
}

double transfer_term(std::uint64_t bytes, const FlashModel& model) {
    return static_cast<double>(bytes) / model.max_bandwidth;
}

}  // namespace

IoReport simulate(const ReadPlan& plan, const FlashModel& model) {
    IoReport report;
    report.io_ops = plan.extents.size();
    if (report.io_ops == 0) return report;
    const std::uint64_t bundles = plan.total_length();
    report.bytes_read = bundles * model.bundle_bytes;
    report.latency = command_term(plan, model) + transfer_term(report.bytes_read, model);
    const double demanded = static_cast<double>(plan.activated_neurons * model.bundle_bytes);
    report.effective_bandwidth = demanded / report.latency;
    report.raw_bandwidth = static_cast<double>(report.bytes_read) / report.latency;
    report.mean_extent_len = static_cast<double>(bundles) / static_cast<double>(report.io_ops);
    return report;
}

bool is_iops_bound(const ReadPlan& plan, const FlashModel& model) {
    return command_term(plan, model) > transfer_term(plan.total_length() * model.bundle_bytes, model);
}

double single_read_bandwidth(const FlashModel& model, double bytes) {
    if (bytes <= 0.0) return 0.0;
    return bytes / (model.command_time() + bytes / model.max_bandwidth);
}

namespace {

struct Fit {
    double t = 0.0;  // seconds per command
    double c = 0.0;  // seconds per byte (1 / B_max)
};

double sum_sq(std::span<const CurvePoint> points, const Fit& f) {
    double acc = 0.0;
    for (const auto& p : points) {
        const double r = p.bandwidth - p.io_size_bytes / (f.t + f.c * p.io_size_bytes);
        acc += r * r;
    }
    return acc;
}

// s / bw = t + c s is linear in (t, c).
Fit linearised_fit(std::span<const CurvePoint> points) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(points.size());
    for (const auto& p : points) {
        const double x = p.io_size_bytes;
        const double y = p.io_size_bytes / p.bandwidth;
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double denom = n * sxx - sx * sx;
    Fit f;
    f.c = (n * sxy - sx * sy) / denom;
    f.t = (sy - f.c * sx) / n;
    return f;
}

// Levenberg-Marquardt on the bandwidth residuals, in parameters scaled by
// the starting point so both coordinates are O(1).
Fit refine(std::span<const CurvePoint> points, Fit start) {
    const double ts = std::abs(start.t) > 0 ? std::abs(start.t) : 1e-6;
    const double cs = std::abs(start.c) > 0 ? std::abs(start.c) : 1e-10;
    Fit f = start;
    double cost = sum_sq(points, f);
    double lambda = 1e-3;
    for (int iter = 0; iter < 200; ++iter) {
        double a11 = 0, a12 = 0, a22 = 0, g1 = 0, g2 = 0;
        for (const auto& p : points) {
            const double s = p.io_size_bytes;
            const double d = f.t + f.c * s;
            const double r = p.bandwidth - s / d;
            // Derivatives of the model with respect to the scaled parameters.
            const double jt = -s / (d * d) * ts;
            const double jc = -s * s / (d * d) * cs;
            a11 += jt * jt;
            a12 += jt * jc;
            a22 += jc * jc;
            g1 += jt * r;
            g2 += jc * r;
        }
        bool improved = false;
        for (int attempt = 0; attempt < 20 && !improved; ++attempt) {
            const double b11 = a11 * (1 + lambda);
            const double b22 = a22 * (1 + lambda);
            const double det = b11 * b22 - a12 * a12;
            if (!(std::abs(det) > 0)) break;
            const double dt = (b22 * g1 - a12 * g2) / det;
            const double dc = (b11 * g2 - a12 * g1) / det;
            Fit next{f.t + dt * ts, f.c + dc * cs};
            const double next_cost = (next.t > 0) ? sum_sq(points, next) : INFINITY;
            if (next_cost < cost) {
                const double gain = cost - next_cost;
                f = next;
                cost = next_cost;
                lambda = std::max(lambda / 10, 1e-12);
                improved = true;
                if (gain <= 1e-15 * cost) return f;
            } else {
                lambda *= 10;
            }
        }
        if (!improved) break;
    }
    return f;
}

}  // namespace

CalibrationResult calibrate_from_curve(std::span<const CurvePoint> points,
                                       std::uint32_t queue_depth, std::uint64_t bundle_bytes) {
    if (points.size() < 2) {
        throw Error(ErrorKind::invalid_argument, "calibration needs at least two points");
    }
    if (queue_depth < 1) throw Error(ErrorKind::invalid_argument, "queue_depth must be >= 1");
    for (const auto& p : points) {
        if (!(p.io_size_bytes > 0) || !(p.bandwidth > 0)) {
            throw Error(ErrorKind::invalid_argument, "calibration points must be positive");
        }
    }
    std::vector<double> sizes;
    for (const auto& p : points) sizes.push_back(p.io_size_bytes);
    std::sort(sizes.begin(), sizes.end());
    if (std::adjacent_find(sizes.begin(), sizes.end()) != sizes.end()) {
        throw Error(ErrorKind::invalid_argument, "calibration sizes must be distinct");
    }

    Fit fit = refine(points, linearised_fit(points));
    if (!(fit.t > 0) || !std::isfinite(fit.t)) {
        throw Error(ErrorKind::calibration,
                    fmt::format("fitted command time {} s is not positive", fit.t));
    }

    CalibrationResult result;
    double max_measured = 0.0;
    double mean_measured = 0.0;
    for (const auto& p : points) {
        max_measured = std::max(max_measured, p.bandwidth);
        mean_measured += p.bandwidth / static_cast<double>(points.size());
    }
    if (fit.c > 0) {
        // The largest size must reach a tenth of the knee for B_max to be observable.
        const double knee = fit.t / fit.c;
        result.bandwidth_unbounded = sizes.back() < 0.1 * knee;
    } else {
        // Purely linear data: refit the command time alone, B_max from below.
        double acc = 0.0;
        for (const auto& p : points) acc += p.io_size_bytes / p.bandwidth;
        fit.t = acc / static_cast<double>(points.size());
        fit.c = 1.0 / max_measured;
        result.bandwidth_unbounded = true;
    }
    if (result.bandwidth_unbounded && fit.c > 1.0 / max_measured) fit.c = 1.0 / max_measured;

    result.model.op_latency = fit.t * queue_depth;
    result.model.max_bandwidth = 1.0 / fit.c;
    result.model.queue_depth = queue_depth;
    result.model.bundle_bytes = bundle_bytes;
    result.model.iops_knee_bytes = result.model.derived_knee_bytes();
    result.rms_residual = std::sqrt(sum_sq(points, fit) / static_cast<double>(points.size()));
    result.relative_residual = result.rms_residual / mean_measured;
    return result;
}

std::vector<CurvePoint> read_curve_points(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, fmt::format("cannot open {}", path.string()));
    std::vector<CurvePoint> points;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream fields(line);
        CurvePoint p;
        if (!(fields >> p.io_size_bytes >> p.bandwidth)) {
            if (points.empty() && line_no == 1) continue;  // header
            throw Error(ErrorKind::parse, fmt::format("{} line {}: expected 'size,bandwidth'",
                                                      path.string(), line_no));
        }
        points.push_back(p);
    }
    return points;
}

FlashModel HardwareProfile::model_for(std::uint32_t bundle_width) const {
    FlashModel m;
    m.op_latency = op_latency;
    m.max_bandwidth = max_bandwidth;
    m.queue_depth = queue_depth;
    m.bundle_bytes = bundle_bytes ? *bundle_bytes
                                  : std::uint64_t{neuron_dim} * bundle_width * precision_bytes;
    m.iops_knee_bytes = m.derived_knee_bytes();
    m.validate();
    return m;
}

HardwareProfile preset_profile(const std::string& name) {
    HardwareProfile p;
    p.name = name;
    p.queue_depth = kUfsQueueDepth;
    // Per-command latency chosen so the effective knee falls at 24 KiB.
    p.op_latency = kUfs40KneeBytes / kUfs40Bandwidth * kUfsQueueDepth;
    if (name == "ufs40") {
        p.max_bandwidth = kUfs40Bandwidth;
    } else if (name == "ufs31") {
        p.max_bandwidth = kUfs40Bandwidth / 2;
    } else {
        throw Error(ErrorKind::config, fmt::format("unknown hardware profile '{}'", name));
    }
    return p;
}

std::vector<std::string> preset_names() { return {"ufs40", "ufs31"}; }

void write_profile(const HardwareProfile& profile, std::ostream& out) {
    out << detail::profile_to_json(profile).dump(2) << '\n';
    if (!out) throw Error(ErrorKind::io, "failed writing profile");
}

HardwareProfile read_profile(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, fmt::format("cannot open {}", path.string()));
    try {
        return detail::profile_from_json(nlohmann::json::parse(in), "profile",
                                         path.stem().string());
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, fmt::format("{}: {}", path.string(), e.what()));
    }
}

}  // namespace ripplekit
