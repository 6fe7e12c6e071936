#include "ripplekit/stats.hpp"

#include <algorithm>
#include <tuple>
#include <fstream>
#include <thread>
#include <unordered_map>

#include <fmt/format.h>
#include <json.hpp>

#include "ripplekit/error.hpp"

namespace ripplekit {

CoActivationStats::CoActivationStats(std::uint32_t neuron_count, std::uint64_t token_count,
                                     std::vector<std::uint64_t> single_freq,
                                     std::vector<PairCount> pairs, std::uint32_t layer_id)
    : neuron_count_(neuron_count),
      token_count_(token_count),
      layer_id_(layer_id),
      single_freq_(std::move(single_freq)),
      pairs_(std::move(pairs)) {
    if (single_freq_.size() != neuron_count_) {
        throw Error(ErrorKind::invalid_argument,
                    fmt::format("single_freq has {} entries, expected {}", single_freq_.size(),
                                neuron_count_));
    }
    for (std::size_t i = 0; i < single_freq_.size(); ++i) {
        if (single_freq_[i] > token_count_) {
            throw Error(ErrorKind::invalid_argument,
                        fmt::format("f({}) = {} exceeds token_count {}", i, single_freq_[i],
                                    token_count_));
        }
        single_total_ += single_freq_[i];
    }
    row_begin_.assign(static_cast<std::size_t>(neuron_count_) + 1, 0);
    for (std::size_t k = 0; k < pairs_.size(); ++k) {
        const PairCount& p = pairs_[k];
        if (p.i >= p.j || p.j >= neuron_count_) {
            throw Error(ErrorKind::invalid_argument,
                        fmt::format("pair ({}, {}) must satisfy i < j < {}", p.i, p.j, neuron_count_));
        }
        if (k > 0) {
            const PairCount& q = pairs_[k - 1];
            if (std::tie(q.i, q.j) >= std::tie(p.i, p.j)) {
                throw Error(ErrorKind::invalid_argument, "pairs must be sorted and unique");
            }
        }
        if (p.count == 0) {
            throw Error(ErrorKind::invalid_argument, "stored pairs must have nonzero counts");
        }
        if (p.count > std::min(single_freq_[p.i], single_freq_[p.j])) {
            throw Error(ErrorKind::invalid_argument,
                        fmt::format("f({}, {}) = {} exceeds min(f(i), f(j))", p.i, p.j, p.count));
        }
        pair_total_ += p.count;
        ++row_begin_[p.i + 1];
    }
    for (std::size_t r = 1; r < row_begin_.size(); ++r) row_begin_[r] += row_begin_[r - 1];
}

std::uint64_t CoActivationStats::single_freq(NeuronId i) const {
    if (i >= neuron_count_) {
        throw Error(ErrorKind::invalid_argument,
                    fmt::format("neuron id {} out of range [0, {})", i, neuron_count_));
    }
    return single_freq_[i];
}

std::uint64_t CoActivationStats::pair_freq(NeuronId i, NeuronId j) const {
    if (i >= neuron_count_ || j >= neuron_count_) {
        throw Error(ErrorKind::invalid_argument,
                    fmt::format("pair ({}, {}) out of range [0, {})", i, j, neuron_count_));
    }
    if (i == j) return 0;
    if (i > j) std::swap(i, j);
    const auto first = pairs_.begin() + row_begin_[i];
    const auto last = pairs_.begin() + row_begin_[i + 1];
    auto it = std::lower_bound(first, last, j,
                               [](const PairCount& p, NeuronId key) { return p.j < key; });
    return (it != last && it->j == j) ? it->count : 0;
}

CoActivationStats CoActivationStats::scaled(std::uint64_t factor) const {
    if (factor == 0) throw Error(ErrorKind::invalid_argument, "scale factor must be positive");
    auto singles = single_freq_;
    for (auto& f : singles) f *= factor;
    auto pairs = pairs_;
    for (auto& p : pairs) p.count *= factor;
    return CoActivationStats(neuron_count_, token_count_ * factor, std::move(singles),
                             std::move(pairs), layer_id_);
}

bool CoActivationStats::operator==(const CoActivationStats& other) const {
    return neuron_count_ == other.neuron_count_ && token_count_ == other.token_count_ &&
           layer_id_ == other.layer_id_ && single_freq_ == other.single_freq_ &&
           pairs_ == other.pairs_;
}

namespace {

// Dense upper-triangular counters up to this many pairs (N ~ 8k); hashing above.
constexpr std::uint64_t kDensePairLimit = std::uint64_t{1} << 25;

CoActivationStats count_tokens(const LayerTrace& trace, std::size_t begin, std::size_t end) {
    const std::uint64_t n = trace.neuron_count;
    std::vector<std::uint64_t> singles(n, 0);
    std::vector<PairCount> pairs;
    const std::uint64_t tri = n * (n > 0 ? n - 1 : 0) / 2;

    if (tri <= kDensePairLimit) {
        std::vector<std::uint32_t> dense(tri, 0);
        for (std::size_t t = begin; t < end; ++t) {
            const auto& ids = trace.tokens[t];
            for (std::size_t a = 0; a < ids.size(); ++a) {
                const std::uint64_t i = ids[a];
                ++singles[i];
                const std::uint64_t row = i * (2 * n - i - 1) / 2 - i - 1;
                for (std::size_t b = a + 1; b < ids.size(); ++b) ++dense[row + ids[b]];
            }
        }
        for (std::uint64_t i = 0; i + 1 < n; ++i) {
            const std::uint64_t row = i * (2 * n - i - 1) / 2 - i - 1;
            for (std::uint64_t j = i + 1; j < n; ++j) {
                if (const auto c = dense[row + j]) {
                    pairs.push_back({static_cast<NeuronId>(i), static_cast<NeuronId>(j), c});
                }
            }
        }
    } else {
        std::unordered_map<std::uint64_t, std::uint64_t> sparse;
        for (std::size_t t = begin; t < end; ++t) {
            const auto& ids = trace.tokens[t];
            for (std::size_t a = 0; a < ids.size(); ++a) {
                ++singles[ids[a]];
                for (std::size_t b = a + 1; b < ids.size(); ++b) {
                    ++sparse[(std::uint64_t{ids[a]} << 32) | ids[b]];
                }
            }
        }
        pairs.reserve(sparse.size());
        for (const auto& [key, c] : sparse) {
            pairs.push_back({static_cast<NeuronId>(key >> 32),
                             static_cast<NeuronId>(key & 0xffffffffU), c});
        }
        std::sort(pairs.begin(), pairs.end(), [](const PairCount& x, const PairCount& y) {
            return std::tie(x.i, x.j) < std::tie(y.i, y.j);
        });
    }
    return CoActivationStats(trace.neuron_count, end - begin, std::move(singles), std::move(pairs),
                             trace.layer_id);
}

}  // namespace

CoActivationStats extract_stats(const LayerTrace& trace, unsigned workers) {
    trace.validate();
    const std::size_t tokens = trace.tokens.size();
    workers = std::max(1U, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(tokens, 1))));
    if (workers == 1) return count_tokens(trace, 0, tokens);

    std::vector<CoActivationStats> partial(workers);
    {
        std::vector<std::jthread> threads;
        threads.reserve(workers);
        for (unsigned w = 0; w < workers; ++w) {
            const std::size_t begin = tokens * w / workers;
            const std::size_t end = tokens * (w + 1) / workers;
            threads.emplace_back([&partial, &trace, w, begin, end] {
                partial[w] = count_tokens(trace, begin, end);
            });
        }
    }
    CoActivationStats total = std::move(partial[0]);
    for (unsigned w = 1; w < workers; ++w) total = merge(total, partial[w]);
    return total;
}

CoActivationStats merge(const CoActivationStats& a, const CoActivationStats& b) {
    if (a.neuron_count() != b.neuron_count() || a.layer_id() != b.layer_id()) {
        throw Error(ErrorKind::dimension_mismatch, "cannot merge stats of different layers");
    }
    std::vector<std::uint64_t> singles(a.single_freqs().begin(), a.single_freqs().end());
    for (std::size_t i = 0; i < singles.size(); ++i) singles[i] += b.single_freqs()[i];

    std::vector<PairCount> pairs;
    pairs.reserve(a.pairs().size() + b.pairs().size());
    auto x = a.pairs().begin();
    auto y = b.pairs().begin();
    while (x != a.pairs().end() || y != b.pairs().end()) {
        if (y == b.pairs().end() ||
            (x != a.pairs().end() && std::tie(x->i, x->j) < std::tie(y->i, y->j))) {
            pairs.push_back(*x++);
        } else if (x == a.pairs().end() || std::tie(y->i, y->j) < std::tie(x->i, x->j)) {
            pairs.push_back(*y++);
        } else {
            pairs.push_back({x->i, x->j, x->count + y->count});
            ++x;
            ++y;
        }
    }
    return CoActivationStats(a.neuron_count(), a.token_count() + b.token_count(), std::move(singles),
                             std::move(pairs), a.layer_id());
}

double prob_single(const CoActivationStats& stats, NeuronId i) {
    const auto f = stats.single_freq(i);
    if (stats.single_total() == 0) {
        throw Error(ErrorKind::degenerate_stats, "all activation frequencies are zero");
    }
    return static_cast<double>(f) / static_cast<double>(stats.single_total());
}

double prob_pair(const CoActivationStats& stats, NeuronId i, NeuronId j) {
    if (i == j) {
        throw Error(ErrorKind::invalid_pair, fmt::format("pair ({}, {}) is not a pair", i, j));
    }
    const auto f = stats.pair_freq(i, j);
    if (stats.pair_total() == 0) {
        throw Error(ErrorKind::degenerate_stats, "no pair was ever co-activated");
    }
    return static_cast<double>(f) / (2.0 * static_cast<double>(stats.pair_total()));
}

void write_stats(const CoActivationStats& stats, std::ostream& out) {
    nlohmann::json pairs = nlohmann::json::array();
    for (const auto& p : stats.pairs()) pairs.push_back({p.i, p.j, p.count});
    nlohmann::json doc = {
        {"layer_id", stats.layer_id()},
        {"neuron_count", stats.neuron_count()},
        {"token_count", stats.token_count()},
        {"single_freq", std::vector<std::uint64_t>(stats.single_freqs().begin(),
                                                   stats.single_freqs().end())},
        {"pairs", std::move(pairs)},
    };
    out << doc.dump() << '\n';
    if (!out) throw Error(ErrorKind::io, "failed writing stats");
}

void write_stats(const CoActivationStats& stats, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, fmt::format("cannot open {} for writing", path.string()));
    write_stats(stats, out);
}

CoActivationStats read_stats(std::istream& in) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
        std::vector<PairCount> pairs;
        const auto& list = doc.at("pairs");
        pairs.reserve(list.size());
        for (const auto& triple : list) {
            if (!triple.is_array() || triple.size() != 3) {
                throw Error(ErrorKind::parse, "stats pair entries must be [i, j, count]");
            }
            pairs.push_back({triple[0].get<NeuronId>(), triple[1].get<NeuronId>(),
                             triple[2].get<std::uint64_t>()});
        }
        return CoActivationStats(doc.at("neuron_count").get<std::uint32_t>(),
                                 doc.at("token_count").get<std::uint64_t>(),
                                 doc.at("single_freq").get<std::vector<std::uint64_t>>(),
                                 std::move(pairs), doc.value("layer_id", std::uint32_t{0}));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::parse, fmt::format("stats file: {}", e.what()));
    } catch (const Error& e) {
        if (e.kind() == ErrorKind::parse) throw;
        throw Error(ErrorKind::parse, fmt::format("stats file: {}", e.what()));
    }
}

CoActivationStats read_stats(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, fmt::format("cannot open {}", path.string()));
    return read_stats(in);
}

}  // namespace ripplekit
