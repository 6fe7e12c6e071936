#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "ripplekit/stats.hpp"
#include "ripplekit/trace.hpp"

namespace ripplekit {

/// Flash position of a neuron bundle.
using Position = std::uint32_t;

/// Linear order of neuron bundles in flash: `order()[p]` is stored at position p.
class Placement {
public:
    Placement() = default;

    /// Throws Error{invalid_argument} unless `order` is a permutation of [0, N).
    static Placement from_order(std::vector<NeuronId> order);
    static Placement identity(std::uint32_t neuron_count);
    /// Seeded uniform random permutation.
    static Placement shuffled(std::uint32_t neuron_count, std::uint64_t seed);

    std::uint32_t size() const noexcept { return static_cast<std::uint32_t>(order_.size()); }
    std::span<const NeuronId> order() const noexcept { return order_; }
    NeuronId at(Position p) const { return order_.at(p); }
    Position position_of(NeuronId id) const;

    Placement reversed() const;

    bool operator==(const Placement&) const = default;

private:
    std::vector<NeuronId> order_;
    std::vector<Position> inverse_;
};

/// dist(n_i, n_j) = 1 - P(ij). Pairs never co-activated are at distance 1,
/// which is also what every pair gets when no pair was ever co-activated.
double neuron_distance(const CoActivationStats& stats, NeuronId i, NeuronId j);

/// Endpoints of a neuron link (a path fragment); head == tail for singletons.
struct LinkEnds {
    NeuronId head = 0;
    NeuronId tail = 0;
};

/// Minimum neuron distance over the four head/tail endpoint combinations.
/// Throws Error{invalid_pair} when the two links share an endpoint.
double link_distance(const LinkEnds& a, const LinkEnds& b, const CoActivationStats& stats);

/// Bookkeeping of one greedy search, for inspection and tests.
struct SearchTrace {
    std::size_t unions = 0;
    std::uint32_t max_neighbor_count = 0;
    std::vector<std::pair<NeuronId, NeuronId>> links;  // in the order they were formed
};

/// Greedy link merging for a short Hamiltonian path over the co-activation graph.
///
/// Pairs are taken in ascending distance, ties broken by lexicographic (i, j).
/// A pair is linked unless one endpoint already has two neighbors or both lie
/// on the same path; exactly N - 1 links are formed. The path is emitted by
/// walking from the lowest-id endpoint.
///
/// Distances are ranked through the integer pair counts (1 - f/D is strictly
/// decreasing in f), which keeps ties exact. Co-activated pairs are ranked
/// explicitly; the remaining distance-1 pairs are replayed in lexicographic
/// order by a stitching pass that is equivalent to enumerating them.
Placement greedy_search(const CoActivationStats& stats, SearchTrace* trace = nullptr);

/// Largest N accepted by brute_force_optimal.
inline constexpr std::uint32_t kBruteForceLimit = 10;

/// Exact minimum-cost Hamiltonian path by enumeration; among ties the
/// lexicographically smallest order. Throws Error{size_limit} for N > 10.
Placement brute_force_optimal(const CoActivationStats& stats);

/// Sum of neuron_distance over placement-adjacent pairs.
double path_cost(const CoActivationStats& stats, const Placement& placement);

/// Sum of f(i, j) over placement-adjacent pairs; path_cost is
/// (N - 1) - adjacent_pair_count / (2 * pair_total) when pair_total > 0.
std::uint64_t adjacent_pair_count(const CoActivationStats& stats, const Placement& placement);

struct IoCostEstimate {
    double expected_ops_individual = 0.0;  // sum_i P(i)
    double expected_ops_coactivated = 0.0;  // individual - adjacency_gain
    /// Sum of P(ij) + P(ji) = 2 P(ij) over placement-adjacent unordered pairs,
    /// since P is normalised over ordered pairs.
    double adjacency_gain = 0.0;
};

/// Expected-I/O objective restricted to placement-adjacent pairs. Throws
/// Error{dimension_mismatch} if the placement does not cover the stats, and
/// Error{degenerate_stats} if no neuron was ever activated.
IoCostEstimate evaluate_expected_ops(const CoActivationStats& stats, const Placement& placement);

/// Number of maximal runs of consecutive positions covered by `activated`
/// (ids in any order, duplicates ignored). Zero for an empty set.
std::size_t count_extents(const Placement& placement, std::span<const NeuronId> activated);

// Placement file: {"layer_id": int, "neuron_count": int, "order": [...]}.
void write_placement(const Placement& placement, std::uint32_t layer_id, std::ostream& out);
void write_placement(const Placement& placement, std::uint32_t layer_id,
                     const std::filesystem::path& path);

struct PlacementFile {
    std::uint32_t layer_id = 0;
    Placement placement;
};
PlacementFile read_placement(std::istream& in);
PlacementFile read_placement(const std::filesystem::path& path);

}  // namespace ripplekit
