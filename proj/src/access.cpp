#include "ripplekit/access.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ripplekit/error.hpp"

namespace ripplekit {

void CollapseConfig::validate() const {
    if (!(min_threshold >= 0.0 && min_threshold <= initial_threshold &&
          initial_threshold <= max_threshold)) {
        throw Error(ErrorKind::invalid_argument,
                    fmt::format("collapse thresholds must satisfy 0 <= min ({}) <= initial ({}) <= max ({})",
                                min_threshold, initial_threshold, max_threshold));
    }
    if (!(adjust_factor > 1.0)) {
        throw Error(ErrorKind::invalid_argument, "collapse adjust_factor must exceed 1");
    }
    if (detector_period < 1) {
        throw Error(ErrorKind::invalid_argument, "detector_period must be >= 1");
    }
}

CollapseConfig CollapseConfig::anchored(const FlashModel& model) {
    const double t = analytic_threshold(model);
    return CollapseConfig{t, 0.0, t, 2.0, 16};
}

CollapseConfig CollapseConfig::pinned(double threshold) {
    return CollapseConfig{threshold, threshold, threshold, 2.0, 16};
}

PlannerState initial_planner_state(const CollapseConfig& config) {
    config.validate();
    return PlannerState{config.initial_threshold, 0, false};
}

ReadPlan build_extents(std::span<const NeuronId> activated, const Placement& placement,
                       const CacheView& cached) {
    std::vector<Position> positions;
    positions.reserve(activated.size());
    for (NeuronId id : activated) {
        const Position p = placement.position_of(id);
        if (cached && cached(id)) continue;
        positions.push_back(p);
    }
    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());

    ReadPlan plan;
    plan.activated_neurons = positions.size();
    for (Position p : positions) {
        if (!plan.extents.empty() && plan.extents.back().end() == p) {
            ++plan.extents.back().length;
        } else {
            plan.extents.push_back({p, 1});
        }
    }
    return plan;
}

ReadPlan collapse(const ReadPlan& plan, std::uint32_t threshold) {
    ReadPlan out;
    out.activated_neurons = plan.activated_neurons;
    out.extents.reserve(plan.extents.size());
    for (const Extent& e : plan.extents) {
        if (!out.extents.empty()) {
            Extent& last = out.extents.back();
            if (e.start - last.end() <= threshold) {
                last.length = e.end() - last.start;
                continue;
            }
        }
        out.extents.push_back(e);
    }
    return out;
}

TokenPlan plan_token(std::span<const NeuronId> activated, const Placement& placement,
                     const CacheView& cached, const PlannerState& state, const FlashModel& model,
                     const CollapseConfig& config) {
    TokenPlan result;
    result.uncollapsed = build_extents(activated, placement, cached);
    result.state = state;
    PlannerState& next = result.state;

    if (next.tokens_since_check == 0) {
        result.detector_ran = true;
        const bool bound = is_iops_bound(result.uncollapsed, model);
        // floor() makes thresholds below one inert, so the walk snaps
        // between 0 and 1 instead of creeping through fractions.
        double& t = next.current_threshold;
        if (bound && t < config.max_threshold) {
            t = t >= 1.0 ? t * config.adjust_factor : 1.0;
        } else if (!bound && t > config.min_threshold) {
            t /= config.adjust_factor;
            if (t < 1.0) t = 0.0;
        }
        next.current_threshold =
            std::clamp(next.current_threshold, config.min_threshold, config.max_threshold);
        next.last_bound_state = bound;
    }
    next.tokens_since_check = (next.tokens_since_check + 1) % config.detector_period;

    if (next.last_bound_state) {
        result.plan = collapse(result.uncollapsed,
                               static_cast<std::uint32_t>(std::floor(next.current_threshold)));
    } else {
        result.plan = result.uncollapsed;
    }
    return result;
}

std::uint32_t analytic_threshold(const FlashModel& model) {
    model.validate();
    const double gap = model.command_time() * model.max_bandwidth /
                       static_cast<double>(model.bundle_bytes);
    // Guard against 2.9999999 style rounding of exact quotients.
    return static_cast<std::uint32_t>(std::floor(gap * (1.0 + 1e-12)));
}

}  // namespace ripplekit
