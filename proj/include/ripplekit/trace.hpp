#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace ripplekit {

/// Index of one bound neuron bundle within a layer, e.g. one up-projection
/// column together with its down-projection row.
using NeuronId = std::uint32_t;

/// Activated bundles for one token, strictly ascending.
using TokenActivation = std::vector<NeuronId>;

struct LayerTrace {
    std::uint32_t layer_id = 0;
    std::uint32_t neuron_count = 0;
    std::uint32_t bundle_width = 2;  // matrices bound per bundle: 2 (OPT) or 3 (gated FFN)
    std::vector<TokenActivation> tokens;

    /// Throws Error{invalid_argument} naming the offending token.
    void validate() const;

    /// Tokens [begin, end) as a new trace with the same header.
    LayerTrace slice(std::size_t begin, std::size_t end) const;

    bool operator==(const LayerTrace&) const = default;
};

/// FNV-1a over header and token contents; identifies a replay workload.
std::uint64_t fingerprint(const LayerTrace& trace);

struct SyntheticTraceSpec {
    std::uint32_t neuron_count = 0;
    std::uint32_t token_count = 0;
    double target_sparsity = 0.1;
    std::uint32_t cluster_count = 1;
    double cluster_fidelity = 1.0;
    std::uint64_t seed = 0;
    std::uint32_t layer_id = 0;
    std::uint32_t bundle_width = 2;

    void validate() const;
};

/// Share of a clustered token's activations drawn from its cluster; the rest
/// is uniform noise over the whole layer.
inline constexpr double kClusterCoreShare = 0.9;

/// Tokens are drawn in two levels: with probability `cluster_fidelity` a token
/// picks one cluster of a hidden random partition and activates (mostly)
/// members of it, otherwise it activates a uniform random subset.
LayerTrace generate_clustered_trace(const SyntheticTraceSpec& spec);

/// The hidden partition used by generate_clustered_trace for the same spec.
/// Each cluster's members are sorted ascending.
std::vector<std::vector<NeuronId>> cluster_partition(const SyntheticTraceSpec& spec);

// JSONL: header object line, then one ascending id array per token.
void write_trace(const LayerTrace& trace, std::ostream& out);
void write_trace(const LayerTrace& trace, const std::filesystem::path& path);
LayerTrace read_trace(std::istream& in);
LayerTrace read_trace(const std::filesystem::path& path);

}  // namespace ripplekit
