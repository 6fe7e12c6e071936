#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "ripplekit/trace.hpp"

namespace ripplekit {

/// Co-activation count of one unordered pair, stored with i < j.
struct PairCount {
    NeuronId i = 0;
    NeuronId j = 0;
    std::uint64_t count = 0;

    bool operator==(const PairCount&) const = default;
};

/// Activation counts f(n_i) and co-activation counts f(n_i, n_j) over a trace.
///
/// Only co-activated pairs are stored, sorted lexicographically by (i, j);
/// absent pairs have count zero. Immutable once built.
class CoActivationStats {
public:
    CoActivationStats() = default;

    /// Validates the invariants (sorted unique pairs with i < j < N, nonzero
    /// counts, f(i,j) <= min(f(i), f(j)), f(i) <= token_count) and throws
    /// Error{invalid_argument} otherwise.
    CoActivationStats(std::uint32_t neuron_count, std::uint64_t token_count,
                      std::vector<std::uint64_t> single_freq, std::vector<PairCount> pairs,
                      std::uint32_t layer_id = 0);

    std::uint32_t neuron_count() const noexcept { return neuron_count_; }
    std::uint64_t token_count() const noexcept { return token_count_; }
    std::uint32_t layer_id() const noexcept { return layer_id_; }

    std::uint64_t single_freq(NeuronId i) const;
    std::span<const std::uint64_t> single_freqs() const noexcept { return single_freq_; }

    /// Symmetric: pair_freq(i, j) == pair_freq(j, i); zero when i == j.
    std::uint64_t pair_freq(NeuronId i, NeuronId j) const;
    std::span<const PairCount> pairs() const noexcept { return pairs_; }

    /// Sum of f(n_k) over all neurons.
    std::uint64_t single_total() const noexcept { return single_total_; }
    /// Sum of f(n_k, n_l) over unordered pairs k < l.
    std::uint64_t pair_total() const noexcept { return pair_total_; }

    /// Every pair count multiplied by `factor` (single counts too, so the
    /// invariants keep holding). Used to check scale invariance of the search.
    CoActivationStats scaled(std::uint64_t factor) const;

    bool operator==(const CoActivationStats& other) const;

private:
    std::uint32_t neuron_count_ = 0;
    std::uint64_t token_count_ = 0;
    std::uint32_t layer_id_ = 0;
    std::vector<std::uint64_t> single_freq_;
    std::vector<PairCount> pairs_;
    std::vector<std::uint32_t> row_begin_;  // pairs_ index of the first pair with i == row
    std::uint64_t single_total_ = 0;
    std::uint64_t pair_total_ = 0;
};

/// Counts activations and co-activations. With `workers > 1` the tokens are
/// sharded across threads and the partial counts are summed; the result is
/// identical to the single-threaded count.
CoActivationStats extract_stats(const LayerTrace& trace, unsigned workers = 1);

/// Sums two count sets over disjoint token ranges of the same layer.
CoActivationStats merge(const CoActivationStats& a, const CoActivationStats& b);

/// P(i) = f(n_i) / sum_k f(n_k). Throws Error{degenerate_stats} if all counts are zero.
double prob_single(const CoActivationStats& stats, NeuronId i);

/// P(ij) = f(n_i, n_j) / sum_{k != l} f(n_k, n_l). The denominator runs over
/// ordered pairs, so it is twice pair_total() and P summed over all ordered
/// pairs is one. Throws Error{invalid_pair} for i == j and
/// Error{degenerate_stats} when no pair was ever co-activated.
double prob_pair(const CoActivationStats& stats, NeuronId i, NeuronId j);

// Stats cache file: {"layer_id", "neuron_count", "token_count", "single_freq": [...],
// "pairs": [[i, j, count], ...]} with i < j, pairs sorted lexicographically.
void write_stats(const CoActivationStats& stats, std::ostream& out);
void write_stats(const CoActivationStats& stats, const std::filesystem::path& path);
CoActivationStats read_stats(std::istream& in);
CoActivationStats read_stats(const std::filesystem::path& path);

}  // namespace ripplekit
