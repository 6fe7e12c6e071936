#pragma once

#include <algorithm>
#include <random>
#include <tuple>
#include <vector>

#include "ripplekit/stats.hpp"
#include "ripplekit/trace.hpp"

namespace testutil {

using ripplekit::NeuronId;

/// Stats with exactly these pair counts. Single counts are the per-neuron
/// sums, which always satisfies f(i, j) <= min(f(i), f(j)).
inline ripplekit::CoActivationStats make_stats(
    std::uint32_t n, std::vector<std::tuple<NeuronId, NeuronId, std::uint64_t>> counts) {
    std::vector<std::uint64_t> single(n, 0);
    std::vector<ripplekit::PairCount> pairs;
    std::sort(counts.begin(), counts.end());
    for (auto [i, j, c] : counts) {
        if (c == 0) continue;
        single[i] += c;
        single[j] += c;
        pairs.push_back({i, j, c});
    }
    std::uint64_t tokens = 1;
    for (auto f : single) tokens = std::max(tokens, f);
    return ripplekit::CoActivationStats(n, tokens, single, pairs);
}

/// Every pair gets an independent count in [0, max_count].
inline ripplekit::CoActivationStats random_stats(std::uint32_t n, std::mt19937_64& rng,
                                                 std::uint64_t max_count = 5) {
    std::uniform_int_distribution<std::uint64_t> count(0, max_count);
    std::vector<std::tuple<NeuronId, NeuronId, std::uint64_t>> counts;
    for (NeuronId i = 0; i < n; ++i) {
        for (NeuronId j = i + 1; j < n; ++j) counts.emplace_back(i, j, count(rng));
    }
    return make_stats(n, counts);
}

/// Unstructured trace: each token activates each neuron with probability p.
inline ripplekit::LayerTrace random_trace(std::uint32_t n, std::uint32_t tokens, double p,
                                          std::mt19937_64& rng) {
    ripplekit::LayerTrace t;
    t.neuron_count = n;
    std::bernoulli_distribution on(p);
    for (std::uint32_t k = 0; k < tokens; ++k) {
        auto& tok = t.tokens.emplace_back();
        for (NeuronId i = 0; i < n; ++i) {
            if (on(rng)) tok.push_back(i);
        }
    }
    return t;
}

inline ripplekit::SyntheticTraceSpec clustered(std::uint32_t n, std::uint32_t tokens, double sparsity,
                                               std::uint32_t clusters, double fidelity,
                                               std::uint64_t seed) {
    ripplekit::SyntheticTraceSpec s;
    s.neuron_count = n;
    s.token_count = tokens;
    s.target_sparsity = sparsity;
    s.cluster_count = clusters;
    s.cluster_fidelity = fidelity;
    s.seed = seed;
    return s;
}

}  // namespace testutil
