#include "ripplekit/cache.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "ripplekit/error.hpp"

namespace ripplekit {

void CacheConfig::validate() const {
    auto is_prob = [](double p) { return p >= 0.0 && p <= 1.0; };
    if (!is_prob(admit_prob_sporadic) || !is_prob(admit_prob_segment)) {
        throw Error(ErrorKind::invalid_argument, "admission probabilities must lie in [0, 1]");
    }
    if (admit_prob_segment > admit_prob_sporadic) {
        throw Error(ErrorKind::invalid_argument,
                    fmt::format("admit_prob_segment ({}) must not exceed admit_prob_sporadic ({})",
                                admit_prob_segment, admit_prob_sporadic));
    }
    if (!(small_queue_fraction > 0.0 && small_queue_fraction < 1.0)) {
        throw Error(ErrorKind::invalid_argument, "small_queue_fraction must lie in (0, 1)");
    }
    if (segment_min_len < 1) throw Error(ErrorKind::invalid_argument, "segment_min_len must be >= 1");
}

CacheConfig CacheConfig::from_ratio(double ratio, std::uint32_t neuron_count) {
    if (!(ratio >= 0.0)) throw Error(ErrorKind::invalid_argument, "cache ratio must be >= 0");
    CacheConfig c;
    c.capacity_neurons = static_cast<std::uint32_t>(std::lround(ratio * neuron_count));
    return c;
}

ActivationRuns classify_runs(std::span<const Position> positions, const Placement& placement,
                             std::uint32_t segment_min_len) {
    std::vector<Position> sorted(positions.begin(), positions.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    ActivationRuns runs;
    std::size_t k = 0;
    while (k < sorted.size()) {
        std::size_t end = k + 1;
        while (end < sorted.size() && sorted[end] == sorted[end - 1] + 1) ++end;
        if (end - k >= segment_min_len) {
            auto& seg = runs.segments.emplace_back();
            for (std::size_t q = k; q < end; ++q) seg.push_back(placement.at(sorted[q]));
        } else {
            for (std::size_t q = k; q < end; ++q) runs.sporadic.push_back(placement.at(sorted[q]));
        }
        k = end;
    }
    return runs;
}

LinkingCache::LinkingCache(std::uint32_t neuron_count, const CacheConfig& config)
    : config_(config),
      location_(neuron_count, Location::none),
      accessed_(neuron_count, 0),
      ghost_seq_(neuron_count, 0),
      pending_(neuron_count, 0),
      rng_(config.seed) {
    config_.validate();
    if (config_.capacity_neurons > 0) {
        small_target_ = std::max<std::uint32_t>(
            1, static_cast<std::uint32_t>(
                   std::lround(config_.small_queue_fraction * config_.capacity_neurons)));
    }
    ghost_capacity_ = config_.ghost_size > 0 ? config_.ghost_size
                                             : config_.capacity_neurons - small_target_;
}

bool LinkingCache::lookup_and_touch(NeuronId id) {
    if (location_.at(id) != Location::none) {
        accessed_[id] = 1;
        ++stats_.hits;
        return true;
    }
    ++stats_.misses;
    return false;
}

void LinkingCache::admit(NeuronId id, AdmissionClass cls) {
    admit(std::span<const NeuronId>(&id, 1), cls);
}

void LinkingCache::admit(std::span<const NeuronId> unit, AdmissionClass cls) {
    std::vector<NeuronId> bypass;
    std::vector<NeuronId> rest;
    for (NeuronId id : unit) {
        if (location_.at(id) != Location::none || pending_[id]) continue;
        pending_[id] = 1;
        (config_.ghost_bypass && in_ghost(id) ? bypass : rest).push_back(id);
    }
    for (NeuronId id : bypass) pending_[id] = 0;
    for (NeuronId id : rest) pending_[id] = 0;
    const std::size_t members = bypass.size() + rest.size();
    if (members == 0) return;
    if (members > config_.capacity_neurons) {
        ++stats_.oversize_skipped;
        return;
    }

    const double draw = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
    const double p = cls == AdmissionClass::sporadic ? config_.admit_prob_sporadic
                                                     : config_.admit_prob_segment;
    const bool take_rest = !rest.empty() && draw < p;
    const std::size_t need = bypass.size() + (take_rest ? rest.size() : 0);
    if (need > 0) evict_to_fit(static_cast<std::uint32_t>(need));

    for (NeuronId id : bypass) {
        ghost_remove(id);
        location_[id] = Location::main;
        accessed_[id] = 0;
        main_.push_back(id);
        ++main_count_;
        ++stats_.ghost_promotions;
    }
    auto& admitted = cls == AdmissionClass::sporadic ? stats_.admitted_sporadic : stats_.admitted_segment;
    auto& rejected = cls == AdmissionClass::sporadic ? stats_.rejected_sporadic : stats_.rejected_segment;
    if (take_rest) {
        for (NeuronId id : rest) {
            location_[id] = Location::small;
            accessed_[id] = 0;
            small_.push_back(id);
            ++small_count_;
        }
        admitted += rest.size();
    } else {
        for (NeuronId id : rest) ghost_insert(id);
        rejected += rest.size();
    }
}

void LinkingCache::evict_to_fit(std::uint32_t needed) {
    if (needed > config_.capacity_neurons) {
        throw Error(ErrorKind::capacity,
                    fmt::format("cannot fit {} neurons into a cache of {}", needed,
                                config_.capacity_neurons));
    }
    while (resident_count() + needed > config_.capacity_neurons) evict_one();
}

void LinkingCache::evict_one() {
    for (;;) {
        if ((small_count_ >= small_target_ && small_count_ > 0) || main_count_ == 0) {
            const NeuronId id = small_.front();
            small_.pop_front();
            --small_count_;
            if (accessed_[id]) {
                accessed_[id] = 0;
                location_[id] = Location::main;
                main_.push_back(id);
                ++main_count_;
                ++stats_.promoted_to_main;
                continue;
            }
            location_[id] = Location::none;
            ghost_insert(id);
            ++stats_.evictions;
            return;
        }
        const NeuronId id = main_.front();
        main_.pop_front();
        if (accessed_[id]) {
            accessed_[id] = 0;
            main_.push_back(id);
            ++stats_.main_reinsertions;
            continue;
        }
        --main_count_;
        location_[id] = Location::none;
        ++stats_.evictions;
        return;
    }
}

void LinkingCache::ghost_insert(NeuronId id) {
    if (ghost_capacity_ == 0) return;
    ghost_remove(id);
    const std::uint64_t seq = next_seq_++;
    ghost_seq_[id] = seq;
    ghost_.emplace_back(id, seq);
    ++ghost_live_;
    while (ghost_live_ > ghost_capacity_) {
        const auto [old, old_seq] = ghost_.front();
        ghost_.pop_front();
        if (ghost_seq_[old] == old_seq) {
            ghost_seq_[old] = 0;
            --ghost_live_;
        }
    }
    while (!ghost_.empty() && ghost_seq_[ghost_.front().first] != ghost_.front().second) {
        ghost_.pop_front();
    }
}

void LinkingCache::ghost_remove(NeuronId id) {
    if (ghost_seq_[id] != 0) {
        ghost_seq_[id] = 0;
        --ghost_live_;
    }
}

std::vector<NeuronId> LinkingCache::resident_ids() const {
    std::vector<NeuronId> ids(small_.begin(), small_.end());
    ids.insert(ids.end(), main_.begin(), main_.end());
    return ids;
}

}  // namespace ripplekit
