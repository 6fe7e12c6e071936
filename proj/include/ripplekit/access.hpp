#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <utility>

#include "ripplekit/flashsim.hpp"
#include "ripplekit/placement.hpp"

namespace ripplekit {

/// Residency test handed to the planner; an empty view means nothing is cached.
using CacheView = std::function<bool(NeuronId)>;

/// Gap thresholds are counted in bundles between two extents. A gap is
/// collapsed when it is <= floor(current threshold).
struct CollapseConfig {
    double initial_threshold = 0.0;
    double min_threshold = 0.0;
    double max_threshold = 0.0;
    double adjust_factor = 2.0;
    std::uint32_t detector_period = 16;

    /// 0 <= min <= initial <= max, adjust_factor > 1, detector_period >= 1.
    void validate() const;

    /// Defaults anchored at the break-even gap of `model`: initial = max =
    /// analytic_threshold(model), min = 0.
    static CollapseConfig anchored(const FlashModel& model);
    /// Fixed threshold: min = initial = max = `threshold`.
    static CollapseConfig pinned(double threshold);
};

struct PlannerState {
    double current_threshold = 0.0;
    std::uint32_t tokens_since_check = 0;
    bool last_bound_state = false;  // IOPS-bound at the last detector check

    bool operator==(const PlannerState&) const = default;
};

PlannerState initial_planner_state(const CollapseConfig& config);

/// Maximal position runs of the activated, non-cached neurons.
/// activated_neurons counts those neurons. Ids may come in any order.
ReadPlan build_extents(std::span<const NeuronId> activated, const Placement& placement,
                       const CacheView& cached = {});

/// Merges consecutive extents whose gap is <= threshold, left to right and
/// transitively; the gap is measured from the end of the merged extent.
ReadPlan collapse(const ReadPlan& plan, std::uint32_t threshold);

struct TokenPlan {
    ReadPlan plan;         // what is issued
    ReadPlan uncollapsed;  // build_extents output
    PlannerState state;    // state after this token
    bool detector_ran = false;
};

/// One token of online planning. The bottleneck detector runs on the first
/// token and then every `detector_period` tokens: it classifies the
/// uncollapsed plan with is_iops_bound and moves the threshold
/// multiplicatively (up while IOPS-bound and below max, down while
/// bandwidth-bound and above min). Values below one act like zero and are
/// snapped to it; growth from below one restarts at one. Collapse applies
/// only while the last check found the device IOPS-bound; otherwise the
/// plain runs are issued.
TokenPlan plan_token(std::span<const NeuronId> activated, const Placement& placement,
                     const CacheView& cached, const PlannerState& state, const FlashModel& model,
                     const CollapseConfig& config);

/// Largest gap worth reading speculatively: a gap of g bundles costs
/// g x bundle_bytes / B_max, saving one command time op_latency / queue_depth.
std::uint32_t analytic_threshold(const FlashModel& model);

}  // namespace ripplekit
