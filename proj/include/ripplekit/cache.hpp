#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <span>
#include <vector>

#include "ripplekit/placement.hpp"
#include "ripplekit/trace.hpp"

namespace ripplekit {

struct CacheConfig {
    std::uint32_t capacity_neurons = 0;
    std::uint32_t segment_min_len = 4;   // runs at least this long are continuous segments
    double admit_prob_sporadic = 1.0;
    double admit_prob_segment = 0.25;
    double small_queue_fraction = 0.1;
    std::uint32_t ghost_size = 0;        // entries; 0 sizes the ghost like the main queue
    bool ghost_bypass = true;            // ghost hits skip the admission draw
    std::uint64_t seed = 0;

    void validate() const;

    /// capacity = round(ratio x neuron_count).
    static CacheConfig from_ratio(double ratio, std::uint32_t neuron_count);
};

enum class AdmissionClass { sporadic, segment };

/// Activated neurons split by the length of the position run they fall in.
struct ActivationRuns {
    std::vector<NeuronId> sporadic;           // ascending position
    std::vector<std::vector<NeuronId>> segments;  // each in position order
};

/// Maximal position runs of the activated set; runs of length >=
/// segment_min_len are segments, everything else is sporadic.
ActivationRuns classify_runs(std::span<const Position> positions, const Placement& placement,
                             std::uint32_t segment_min_len);

struct CacheStats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t admitted_sporadic = 0;  // neurons
    std::uint64_t admitted_segment = 0;   // neurons
    std::uint64_t rejected_sporadic = 0;
    std::uint64_t rejected_segment = 0;
    std::uint64_t ghost_promotions = 0;
    std::uint64_t evictions = 0;
    std::uint64_t promoted_to_main = 0;    // small-queue survivors
    std::uint64_t main_reinsertions = 0;
    std::uint64_t oversize_skipped = 0;    // units larger than the capacity

    bool operator==(const CacheStats&) const = default;
};

/// S3-FIFO residency over neuron ids with a linking-aligned admission layer.
///
/// New entries enter a small probationary FIFO; entries touched while there
/// move to the main FIFO when they reach its head, the rest are evicted and
/// remembered in a ghost FIFO of ids. The main FIFO gives touched entries one
/// more round. Admission is probabilistic per class and per unit: a segment
/// is admitted all-or-none with one draw, but its members are evicted
/// individually. Ghost hits go straight to main.
class LinkingCache {
public:
    LinkingCache(std::uint32_t neuron_count, const CacheConfig& config);

    const CacheConfig& config() const noexcept { return config_; }
    std::uint32_t capacity() const noexcept { return config_.capacity_neurons; }
    std::uint32_t small_target() const noexcept { return small_target_; }
    std::uint32_t ghost_capacity() const noexcept { return ghost_capacity_; }

    bool contains(NeuronId id) const { return location_.at(id) != Location::none; }
    bool in_ghost(NeuronId id) const { return ghost_seq_.at(id) != 0; }
    bool in_main(NeuronId id) const { return location_.at(id) == Location::main; }
    std::uint32_t resident_count() const noexcept { return small_count_ + main_count_; }
    std::uint32_t small_count() const noexcept { return small_count_; }
    std::uint32_t main_count() const noexcept { return main_count_; }
    std::uint32_t ghost_count() const noexcept { return ghost_live_; }
    const CacheStats& stats() const noexcept { return stats_; }

    /// Hit: sets the access bit. Miss: only counted.
    bool lookup_and_touch(NeuronId id);

    /// Admits one neuron or one run as a unit. Resident members are ignored.
    void admit(NeuronId id, AdmissionClass cls);
    void admit(std::span<const NeuronId> unit, AdmissionClass cls);

    /// Evicts until `needed` more neurons fit. Throws Error{capacity} if
    /// needed > capacity.
    void evict_to_fit(std::uint32_t needed);

    /// Resident ids, small queue first, each queue in FIFO order.
    std::vector<NeuronId> resident_ids() const;

private:
    enum class Location : std::uint8_t { none, small, main };

    void evict_one();
    void ghost_insert(NeuronId id);
    void ghost_remove(NeuronId id);

    CacheConfig config_;
    std::uint32_t small_target_ = 0;
    std::uint32_t ghost_capacity_ = 0;

    std::vector<Location> location_;
    std::vector<std::uint8_t> accessed_;
    std::deque<NeuronId> small_;
    std::deque<NeuronId> main_;
    std::uint32_t small_count_ = 0;
    std::uint32_t main_count_ = 0;

    // Ghost FIFO with lazy deletion: an entry is live while its sequence
    // number matches ghost_seq_[id].
    std::deque<std::pair<NeuronId, std::uint64_t>> ghost_;
    std::vector<std::uint64_t> ghost_seq_;
    std::uint64_t next_seq_ = 1;
    std::uint32_t ghost_live_ = 0;

    std::vector<char> pending_;  // scratch for de-duplicating an admission unit

    std::mt19937_64 rng_;
    CacheStats stats_;
};

}  // namespace ripplekit
