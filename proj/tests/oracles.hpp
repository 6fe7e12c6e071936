#pragma once

// Deliberately naive reference implementations used to check the library.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <list>
#include <map>
#include <numeric>
#include <queue>
#include <random>
#include <set>
#include <span>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ripplekit/cache.hpp"
#include "ripplekit/placement.hpp"
#include "ripplekit/stats.hpp"
#include "ripplekit/trace.hpp"

namespace oracle {

using ripplekit::NeuronId;

struct NaiveCounts {
    std::vector<std::uint64_t> single;
    std::map<std::pair<NeuronId, NeuronId>, std::uint64_t> pairs;
    std::uint64_t pair_total = 0;

    std::uint64_t pair(NeuronId a, NeuronId b) const {
        if (a > b) std::swap(a, b);
        auto it = pairs.find({a, b});
        return it == pairs.end() ? 0 : it->second;
    }
};

inline NaiveCounts recount(const ripplekit::LayerTrace& trace) {
    NaiveCounts c;
    c.single.assign(trace.neuron_count, 0);
    for (const auto& token : trace.tokens) {
        for (std::size_t x = 0; x < token.size(); ++x) {
            ++c.single[token[x]];
            for (std::size_t y = x + 1; y < token.size(); ++y) {
                ++c.pairs[{std::min(token[x], token[y]), std::max(token[x], token[y])}];
                ++c.pair_total;
            }
        }
    }
    return c;
}

inline double distance(const ripplekit::CoActivationStats& s, NeuronId a, NeuronId b) {
    std::uint64_t total = 0;
    for (const auto& p : s.pairs()) total += p.count;
    if (total == 0) return 1.0;
    return 1.0 - static_cast<double>(s.pair_freq(a, b)) / (2.0 * static_cast<double>(total));
}

inline double link_distance(NeuronId h1, NeuronId t1, NeuronId h2, NeuronId t2,
                            const ripplekit::CoActivationStats& s) {
    const double d[] = {distance(s, h1, h2), distance(s, h1, t2), distance(s, t1, h2),
                        distance(s, t1, t2)};
    return *std::min_element(std::begin(d), std::end(d));
}

/// Greedy link merging over every pair of the complete graph, taken from a
/// priority queue keyed by (distance, i, j).
inline std::vector<NeuronId> greedy_order(const ripplekit::CoActivationStats& s) {
    const NeuronId n = s.neuron_count();
    if (n == 1) return {0};
    using Entry = std::tuple<double, NeuronId, NeuronId>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<Entry>> queue;
    for (NeuronId i = 0; i < n; ++i) {
        for (NeuronId j = i + 1; j < n; ++j) queue.emplace(distance(s, i, j), i, j);
    }
    std::vector<NeuronId> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto root = [&](NeuronId x) {
        while (parent[x] != x) x = parent[x];
        return x;
    };
    std::vector<std::vector<NeuronId>> nbr(n);
    std::size_t links = 0;
    while (links + 1 < n) {
        const auto [d, i, j] = queue.top();
        queue.pop();
        if (nbr[i].size() >= 2 || nbr[j].size() >= 2) continue;
        const NeuronId ri = root(i), rj = root(j);
        if (ri == rj) continue;
        parent[ri] = rj;
        nbr[i].push_back(j);
        nbr[j].push_back(i);
        ++links;
    }
    NeuronId start = 0;
    while (nbr[start].size() != 1) ++start;
    std::vector<NeuronId> order{start};
    NeuronId prev = start, cur = nbr[start][0];
    while (true) {
        order.push_back(cur);
        if (nbr[cur].size() == 1) break;
        const NeuronId next = nbr[cur][0] == prev ? nbr[cur][1] : nbr[cur][0];
        prev = cur;
        cur = next;
    }
    return order;
}

inline double path_cost(const ripplekit::CoActivationStats& s, std::span<const NeuronId> order) {
    double c = 0.0;
    for (std::size_t k = 0; k + 1 < order.size(); ++k) c += distance(s, order[k], order[k + 1]);
    return c;
}

/// Runs of consecutive positions, by marking a bitmap.
inline std::size_t extent_scan(const ripplekit::Placement& p, std::span<const NeuronId> ids) {
    std::vector<bool> mark(p.size(), false);
    for (NeuronId id : ids) mark[p.position_of(id)] = true;
    std::size_t runs = 0;
    for (std::size_t q = 0; q < mark.size(); ++q) {
        if (mark[q] && (q == 0 || !mark[q - 1])) ++runs;
    }
    return runs;
}

/// (start, length) runs of consecutive positions of the given position bitmap.
inline std::vector<std::pair<std::uint32_t, std::uint32_t>> runs_of(const std::vector<bool>& mark) {
    std::vector<std::pair<std::uint32_t, std::uint32_t>> out;
    for (std::uint32_t q = 0; q < mark.size(); ++q) {
        if (!mark[q]) continue;
        if (q > 0 && mark[q - 1]) {
            ++out.back().second;
        } else {
            out.emplace_back(q, 1);
        }
    }
    return out;
}

/// Same eviction and admission policy as LinkingCache, kept in std::lists.
class ReferenceCache {
public:
    ReferenceCache(const ripplekit::CacheConfig& c)
        : cap_(c.capacity_neurons),
          p_sporadic_(c.admit_prob_sporadic),
          p_segment_(c.admit_prob_segment),
          bypass_(c.ghost_bypass),
          rng_(c.seed) {
        if (cap_ > 0) {
            small_target_ = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                         std::lround(c.small_queue_fraction * cap_)));
        }
        ghost_cap_ = c.ghost_size > 0 ? c.ghost_size : cap_ - small_target_;
    }

    bool resident(NeuronId id) const { return in(small_, id) || in(main_, id); }
    bool in_ghost(NeuronId id) const { return in(ghost_, id); }
    std::size_t size() const { return small_.size() + main_.size(); }

    bool lookup(NeuronId id) {
        if (!resident(id)) return false;
        accessed_[id] = true;
        return true;
    }

    void admit(std::span<const NeuronId> unit, bool segment) {
        std::vector<NeuronId> bypass, rest;
        for (NeuronId id : unit) {
            if (resident(id) || in_vec(bypass, id) || in_vec(rest, id)) continue;
            if (bypass_ && in_ghost(id)) {
                bypass.push_back(id);
            } else {
                rest.push_back(id);
            }
        }
        if (bypass.empty() && rest.empty()) return;
        if (bypass.size() + rest.size() > cap_) return;
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng_);
        const bool take = !rest.empty() && u < (segment ? p_segment_ : p_sporadic_);
        const std::size_t need = bypass.size() + (take ? rest.size() : 0);
        while (size() + need > cap_) evict();
        for (NeuronId id : bypass) {
            ghost_.remove(id);
            main_.push_back(id);
            accessed_[id] = false;
        }
        for (NeuronId id : rest) {
            if (take) {
                small_.push_back(id);
                accessed_[id] = false;
            } else {
                remember(id);
            }
        }
    }

private:
    static bool in(const std::list<NeuronId>& l, NeuronId id) {
        return std::find(l.begin(), l.end(), id) != l.end();
    }
    static bool in_vec(const std::vector<NeuronId>& v, NeuronId id) {
        return std::find(v.begin(), v.end(), id) != v.end();
    }

    void remember(NeuronId id) {
        if (ghost_cap_ == 0) return;
        ghost_.remove(id);
        ghost_.push_back(id);
        while (ghost_.size() > ghost_cap_) ghost_.pop_front();
    }

    void evict() {
        while (true) {
            if ((small_.size() >= small_target_ && !small_.empty()) || main_.empty()) {
                const NeuronId id = small_.front();
                small_.pop_front();
                if (accessed_[id]) {
                    accessed_[id] = false;
                    main_.push_back(id);
                    continue;
                }
                remember(id);
                return;
            }
            const NeuronId id = main_.front();
            main_.pop_front();
            if (accessed_[id]) {
                accessed_[id] = false;
                main_.push_back(id);
                continue;
            }
            return;
        }
    }

    std::size_t cap_;
    std::size_t small_target_ = 0;
    std::size_t ghost_cap_;
    double p_sporadic_;
    double p_segment_;
    bool bypass_;
    std::mt19937_64 rng_;
    std::list<NeuronId> small_, main_, ghost_;
    std::unordered_map<NeuronId, bool> accessed_;
};

}  // namespace oracle
