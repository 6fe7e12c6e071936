#include "ripplekit/placement.hpp"

#include <algorithm>
#include <array>
#include <tuple>
#include <fstream>
#include <numeric>
#include <random>
#include <set>

#include <fmt/format.h>
#include <json.hpp>

#include "ripplekit/error.hpp"

namespace ripplekit {

Placement Placement::from_order(std::vector<NeuronId> order) {
    Placement p;
    p.inverse_.assign(order.size(), 0);
    std::vector<char> seen(order.size(), 0);
    for (std::size_t pos = 0; pos < order.size(); ++pos) {
        const NeuronId id = order[pos];
        if (id >= order.size() || seen[id]) {
            throw Error(ErrorKind::invalid_argument,
                        fmt::format("placement order is not a permutation (position {}, id {})", pos, id));
        }
        seen[id] = 1;
        p.inverse_[id] = static_cast<Position>(pos);
    }
    p.order_ = std::move(order);
    return p;
}

Placement Placement::identity(std::uint32_t neuron_count) {
    std::vector<NeuronId> order(neuron_count);
    std::iota(order.begin(), order.end(), NeuronId{0});
    return from_order(std::move(order));
}

Placement Placement::shuffled(std::uint32_t neuron_count, std::uint64_t seed) {
    std::vector<NeuronId> order(neuron_count);
    std::iota(order.begin(), order.end(), NeuronId{0});
    std::mt19937_64 rng(seed);
    for (std::size_t i = order.size(); i > 1; --i) {
        std::uniform_int_distribution<std::size_t> pick(0, i - 1);
        std::swap(order[i - 1], order[pick(rng)]);
    }
    return from_order(std::move(order));
}

Position Placement::position_of(NeuronId id) const {
    if (id >= inverse_.size()) {
        throw Error(ErrorKind::invalid_argument,
                    fmt::format("neuron id {} out of range [0, {})", id, inverse_.size()));
    }
    return inverse_[id];
}

Placement Placement::reversed() const {
    return from_order(std::vector<NeuronId>(order_.rbegin(), order_.rend()));
}

double neuron_distance(const CoActivationStats& stats, NeuronId i, NeuronId j) {
    if (i == j) {
        throw Error(ErrorKind::invalid_pair, fmt::format("distance of neuron {} to itself", i));
    }
    const auto f = stats.pair_freq(i, j);
    if (stats.pair_total() == 0) return 1.0;
    return 1.0 - static_cast<double>(f) / (2.0 * static_cast<double>(stats.pair_total()));
}

double link_distance(const LinkEnds& a, const LinkEnds& b, const CoActivationStats& stats) {
    if (a.head == b.head || a.head == b.tail || a.tail == b.head || a.tail == b.tail) {
        throw Error(ErrorKind::invalid_pair, "link distance requires two distinct links");
    }
    double best = neuron_distance(stats, a.head, b.head);
    if (b.tail != b.head) best = std::min(best, neuron_distance(stats, a.head, b.tail));
    if (a.tail != a.head) {
        best = std::min(best, neuron_distance(stats, a.tail, b.head));
        if (b.tail != b.head) best = std::min(best, neuron_distance(stats, a.tail, b.tail));
    }
    return best;
}

namespace {

constexpr NeuronId kNoNeighbor = UINT32_MAX;

class DisjointSet {
public:
    explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0) {
        std::iota(parent_.begin(), parent_.end(), NeuronId{0});
    }

    NeuronId find(NeuronId x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    void unite(NeuronId a, NeuronId b) {
        if (rank_[a] < rank_[b]) std::swap(a, b);
        parent_[b] = a;
        if (rank_[a] == rank_[b]) ++rank_[a];
    }

private:
    std::vector<NeuronId> parent_;
    std::vector<std::uint8_t> rank_;
};

// NbrCnt, the disjoint sets S(n), and the up-to-two neighbours of each neuron.
class NeuronLinkState {
public:
    explicit NeuronLinkState(std::size_t n)
        : neighbor_count_(n, 0), sets_(n), adjacency_(n, {kNoNeighbor, kNoNeighbor}) {}

    std::uint8_t neighbor_count(NeuronId n) const { return neighbor_count_[n]; }

    bool same_link(NeuronId x, NeuronId y) { return sets_.find(x) == sets_.find(y); }

    /// One popped pair; returns whether a link was formed.
    bool try_link(NeuronId x, NeuronId y, SearchTrace* trace) {
        if (neighbor_count_[x] == 2 || neighbor_count_[y] == 2) return false;
        const NeuronId rx = sets_.find(x);
        const NeuronId ry = sets_.find(y);
        if (rx == ry) return false;
        adjacency_[x][neighbor_count_[x]++] = y;
        adjacency_[y][neighbor_count_[y]++] = x;
        sets_.unite(rx, ry);
        ++unions_;
        if (trace) {
            trace->links.emplace_back(x, y);
            trace->max_neighbor_count = std::max<std::uint32_t>(
                trace->max_neighbor_count, std::max(neighbor_count_[x], neighbor_count_[y]));
        }
        return true;
    }

    std::size_t unions() const { return unions_; }

    std::vector<NeuronId> walk() const {
        const std::size_t n = neighbor_count_.size();
        std::vector<NeuronId> order;
        order.reserve(n);
        if (n == 0) return order;
        if (n == 1) return {0};
        NeuronId start = 0;
        while (start < n && neighbor_count_[start] != 1) ++start;
        NeuronId prev = kNoNeighbor;
        NeuronId cur = start;
        while (cur != kNoNeighbor) {
            order.push_back(cur);
            const auto& nb = adjacency_[cur];
            const NeuronId next = nb[0] != prev ? nb[0] : nb[1];
            prev = cur;
            cur = next;
        }
        return order;
    }

private:
    std::vector<std::uint8_t> neighbor_count_;
    DisjointSet sets_;
    std::vector<std::array<NeuronId, 2>> adjacency_;
    std::size_t unions_ = 0;
};

// Co-activated pairs in pop order: count descending, then (i, j) ascending.
template <typename Fn>
void for_each_ranked_pair(const CoActivationStats& stats, Fn&& fn) {
    const auto pairs = stats.pairs();
    bool packable = stats.neuron_count() <= (1U << 16);
    for (const auto& p : pairs) packable = packable && p.count < (std::uint64_t{1} << 32);

    if (packable) {
        std::vector<std::uint64_t> keys;
        keys.reserve(pairs.size());
        for (const auto& p : pairs) {
            const std::uint64_t inverted = (std::uint64_t{1} << 32) - 1 - p.count;
            keys.push_back((inverted << 32) | (std::uint64_t{p.i} << 16) | p.j);
        }
        std::sort(keys.begin(), keys.end());
        for (const auto key : keys) {
            fn(static_cast<NeuronId>((key >> 16) & 0xffffU), static_cast<NeuronId>(key & 0xffffU));
        }
        return;
    }
    std::vector<PairCount> ranked(pairs.begin(), pairs.end());
    std::sort(ranked.begin(), ranked.end(), [](const PairCount& a, const PairCount& b) {
        if (a.count != b.count) return a.count > b.count;
        return std::tie(a.i, a.j) < std::tie(b.i, b.j);
    });
    for (const auto& p : ranked) fn(p.i, p.j);
}

}  // namespace

Placement greedy_search(const CoActivationStats& stats, SearchTrace* trace) {
    const std::uint32_t n = stats.neuron_count();
    if (trace) *trace = SearchTrace{};
    if (n == 0) return Placement{};

    NeuronLinkState state(n);
    for_each_ranked_pair(stats, [&](NeuronId i, NeuronId j) { state.try_link(i, j, trace); });

    // Distance-1 pairs in lexicographic order. Only neurons with fewer than two
    // neighbours can still link, and at most one of them shares a path with
    // row i, so each row inspects O(1) candidates. Already-counted pairs seen
    // again here are no-ops, exactly as in the full enumeration.
    std::set<NeuronId> open;
    for (NeuronId id = 0; id < n; ++id) {
        if (state.neighbor_count(id) < 2) open.insert(open.end(), id);
    }
    for (NeuronId i = 0; i < n && state.unions() + 1 < n; ++i) {
        if (state.neighbor_count(i) == 2) continue;
        for (auto it = open.upper_bound(i); it != open.end() && state.neighbor_count(i) < 2;) {
            const NeuronId j = *it++;
            if (state.try_link(i, j, trace) && state.neighbor_count(j) == 2) open.erase(j);
        }
    }

    if (trace) trace->unions = state.unions();
    return Placement::from_order(state.walk());
}

Placement brute_force_optimal(const CoActivationStats& stats) {
    const std::uint32_t n = stats.neuron_count();
    if (n > kBruteForceLimit) {
        throw Error(ErrorKind::size_limit,
                    fmt::format("brute-force search supports N <= {}, got {}", kBruteForceLimit, n));
    }
    if (n == 0) return Placement{};
    std::vector<std::uint64_t> weight(static_cast<std::size_t>(n) * n, 0);
    for (const auto& p : stats.pairs()) {
        weight[p.i * n + p.j] = p.count;
        weight[p.j * n + p.i] = p.count;
    }
    // Minimising sum (1 - f/D) over the path is maximising the adjacent count sum.
    std::vector<NeuronId> order(n);
    std::iota(order.begin(), order.end(), NeuronId{0});
    std::vector<NeuronId> best = order;
    std::uint64_t best_gain = 0;
    bool first = true;
    do {
        std::uint64_t gain = 0;
        for (std::size_t p = 0; p + 1 < n; ++p) gain += weight[order[p] * n + order[p + 1]];
        if (first || gain > best_gain) {
            best_gain = gain;
            best = order;
            first = false;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    return Placement::from_order(std::move(best));
}

namespace {

void require_cover(const CoActivationStats& stats, const Placement& placement) {
    if (placement.size() != stats.neuron_count()) {
        throw Error(ErrorKind::dimension_mismatch,
                    fmt::format("placement covers {} neurons, stats cover {}", placement.size(),
                                stats.neuron_count()));
    }
}

}  // namespace

double path_cost(const CoActivationStats& stats, const Placement& placement) {
    require_cover(stats, placement);
    const auto order = placement.order();
    double cost = 0.0;
    for (std::size_t p = 0; p + 1 < order.size(); ++p) {
        cost += neuron_distance(stats, order[p], order[p + 1]);
    }
    return cost;
}

std::uint64_t adjacent_pair_count(const CoActivationStats& stats, const Placement& placement) {
    require_cover(stats, placement);
    const auto order = placement.order();
    std::uint64_t sum = 0;
    for (std::size_t p = 0; p + 1 < order.size(); ++p) sum += stats.pair_freq(order[p], order[p + 1]);
    return sum;
}

IoCostEstimate evaluate_expected_ops(const CoActivationStats& stats, const Placement& placement) {
    require_cover(stats, placement);
    if (stats.single_total() == 0) {
        throw Error(ErrorKind::degenerate_stats, "all activation frequencies are zero");
    }
    IoCostEstimate est;
    for (NeuronId i = 0; i < stats.neuron_count(); ++i) est.expected_ops_individual += prob_single(stats, i);
    if (stats.pair_total() > 0) {
        const auto order = placement.order();
        for (std::size_t p = 0; p + 1 < order.size(); ++p) {
            est.adjacency_gain += 2.0 * prob_pair(stats, order[p], order[p + 1]);
        }
    }
    est.expected_ops_coactivated = est.expected_ops_individual - est.adjacency_gain;
    return est;
}

std::size_t count_extents(const Placement& placement, std::span<const NeuronId> activated) {
    std::vector<Position> positions;
    positions.reserve(activated.size());
    for (NeuronId id : activated) positions.push_back(placement.position_of(id));
    std::sort(positions.begin(), positions.end());
    positions.erase(std::unique(positions.begin(), positions.end()), positions.end());
    std::size_t extents = 0;
    for (std::size_t k = 0; k < positions.size(); ++k) {
        if (k == 0 || positions[k] != positions[k - 1] + 1) ++extents;
    }
    return extents;
}

void write_placement(const Placement& placement, std::uint32_t layer_id, std::ostream& out) {
    nlohmann::json doc = {
        {"layer_id", layer_id},
        {"neuron_count", placement.size()},
        {"order", std::vector<NeuronId>(placement.order().begin(), placement.order().end())},
    };
    out << doc.dump() << '\n';
    if (!out) throw Error(ErrorKind::io, "failed writing placement");
}

void write_placement(const Placement& placement, std::uint32_t layer_id,
                     const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, fmt::format("cannot open {} for writing", path.string()));
    write_placement(placement, layer_id, out);
}

PlacementFile read_placement(std::istream& in) {
    try {
        const auto doc = nlohmann::json::parse(in);
        PlacementFile file;
        file.layer_id = doc.at("layer_id").get<std::uint32_t>();
        const auto n = doc.at("neuron_count").get<std::uint32_t>();
        auto order = doc.at("order").get<std::vector<NeuronId>>();
        if (order.size() != n) {
            throw Error(ErrorKind::parse,
                        fmt::format("placement order has {} entries, neuron_count is {}", order.size(), n));
        }
        file.placement = Placement::from_order(std::move(order));
        return file;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, fmt::format("placement file: {}", e.what()));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::parse) throw;
        throw Error(ErrorKind::parse, fmt::format("placement file: {}", e.what()));
    }
}

PlacementFile read_placement(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, fmt::format("cannot open {}", path.string()));
    return read_placement(in);
}

}  // namespace ripplekit
