#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ripplekit {

/// Cost parameters of a flash device serving neuron-bundle reads.
///
/// Each read command occupies the device for `op_latency`; up to
/// `queue_depth` commands are pipelined, so a command effectively costs
/// op_latency / queue_depth. Data streams at `max_bandwidth`. The size at
/// which the two costs of a single read are equal is the IOPS knee.
struct FlashModel {
    double op_latency = 0.0;      // seconds per read command
    double max_bandwidth = 0.0;   // bytes per second
    std::uint32_t queue_depth = 32;
    std::uint64_t bundle_bytes = 0;
    double iops_knee_bytes = 0.0;  // informational; 0 skips the consistency check

    double command_time() const noexcept { return op_latency / queue_depth; }
    double derived_knee_bytes() const noexcept { return command_time() * max_bandwidth; }

    /// Positivity checks, plus iops_knee_bytes within 20% of derived_knee_bytes().
    void validate() const;
};

/// One contiguous read: `length` bundles starting at flash position `start`.
struct Extent {
    std::uint32_t start = 0;
    std::uint32_t length = 0;

    std::uint32_t end() const noexcept { return start + length; }
    bool operator==(const Extent&) const = default;
};

struct ReadPlan {
    std::vector<Extent> extents;       // sorted, non-overlapping, length >= 1
    std::uint64_t activated_neurons = 0;  // demanded bundles; excludes speculative fill

    std::uint64_t total_length() const noexcept;
    void validate() const;

    bool operator==(const ReadPlan&) const = default;
};

struct IoReport {
    std::uint64_t io_ops = 0;
    std::uint64_t bytes_read = 0;
    double latency = 0.0;              // seconds
    double effective_bandwidth = 0.0;  // demanded bytes / latency
    double raw_bandwidth = 0.0;        // all bytes / latency
    double mean_extent_len = 0.0;      // bundles per command

    bool operator==(const IoReport&) const = default;
};

/// latency = io_ops * op_latency / queue_depth + bytes_read / max_bandwidth.
/// Empty plans cost nothing.
IoReport simulate(const ReadPlan& plan, const FlashModel& model);

/// True iff the command term strictly exceeds the transfer term.
bool is_iops_bound(const ReadPlan& plan, const FlashModel& model);

/// Bandwidth of a single read of `bytes`: bytes / (command_time + bytes / B_max).
double single_read_bandwidth(const FlashModel& model, double bytes);

struct CurvePoint {
    double io_size_bytes = 0.0;
    double bandwidth = 0.0;  // bytes per second
};

struct CalibrationResult {
    FlashModel model;
    double rms_residual = 0.0;       // bytes per second, over the input points
    double relative_residual = 0.0;  // rms_residual / mean measured bandwidth
    /// The points never approach saturation, so they only bound max_bandwidth
    /// from below; the model then carries the largest measured bandwidth.
    bool bandwidth_unbounded = false;
};

/// Least-squares fit of bandwidth(s) = s / (t + s / B_max) to measured points.
/// The fitted per-command time t becomes op_latency = t * queue_depth.
/// Throws Error{invalid_argument} for fewer than two distinct sizes and
/// Error{calibration} when the fit yields non-positive parameters.
CalibrationResult calibrate_from_curve(std::span<const CurvePoint> points,
                                       std::uint32_t queue_depth, std::uint64_t bundle_bytes);

/// Reads "size,bandwidth" lines (a non-numeric first line is a header).
std::vector<CurvePoint> read_curve_points(const std::filesystem::path& path);

/// Named hardware profile. The bundle size follows an FFN bundle:
/// neuron_dim x bundle_width x precision_bytes, unless fixed explicitly.
struct HardwareProfile {
    std::string name;
    double op_latency = 0.0;
    double max_bandwidth = 0.0;
    std::uint32_t queue_depth = 32;
    std::uint32_t neuron_dim = 1024;
    std::uint32_t precision_bytes = 2;
    std::optional<std::uint64_t> bundle_bytes;

    FlashModel model_for(std::uint32_t bundle_width) const;
};

inline constexpr double kUfs40Bandwidth = 2.9e9;  // bytes/s per lane
inline constexpr double kUfs40KneeBytes = 24576.0;
inline constexpr std::uint32_t kUfsQueueDepth = 32;

/// "ufs40" or "ufs31"; throws Error{config} otherwise.
HardwareProfile preset_profile(const std::string& name);
std::vector<std::string> preset_names();

// Profile file: {"name", "op_latency", "max_bandwidth", "queue_depth",
// "neuron_dim", "precision_bytes", "bundle_bytes"?}.
void write_profile(const HardwareProfile& profile, std::ostream& out);
HardwareProfile read_profile(const std::filesystem::path& path);

}  // namespace ripplekit
