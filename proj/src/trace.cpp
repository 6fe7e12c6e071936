#include "ripplekit/trace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <json.hpp>

#include "ripplekit/error.hpp"

namespace ripplekit {

namespace {

using Rng = std::mt19937_64;

// Generator streams are keyed apart from placement and cache seeds, so a
// shuffled placement with the trace's seed does not replay its cluster layout.
Rng generator_rng(std::uint64_t seed) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      0x74726163u};
    return Rng(seq);
}

std::uint64_t uniform_below(Rng& rng, std::uint64_t bound) {
    return std::uniform_int_distribution<std::uint64_t>(0, bound - 1)(rng);
}

double uniform01(Rng& rng) {
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

std::vector<std::vector<NeuronId>> draw_partition(Rng& rng, const SyntheticTraceSpec& spec) {
    std::vector<NeuronId> perm(spec.neuron_count);
    std::iota(perm.begin(), perm.end(), NeuronId{0});
    for (std::size_t i = perm.size(); i > 1; --i) {
        std::swap(perm[i - 1], perm[uniform_below(rng, i)]);
    }
    std::vector<std::vector<NeuronId>> clusters(spec.cluster_count);
    const std::size_t n = perm.size();
    const std::size_t c = spec.cluster_count;
    for (std::size_t k = 0; k < c; ++k) {
        const std::size_t begin = k * n / c;
        const std::size_t end = (k + 1) * n / c;
        clusters[k].assign(perm.begin() + begin, perm.begin() + end);
        std::sort(clusters[k].begin(), clusters[k].end());
    }
    return clusters;
}

// Partial Fisher-Yates over a persistent pool: appends `count` ids not yet
// marked in `chosen`, marking them. The pool stays a permutation of [0, N).
void draw_unmarked(Rng& rng, std::vector<NeuronId>& pool, std::vector<char>& chosen,
                   std::size_t count, TokenActivation& out) {
    const std::size_t n = pool.size();
    for (std::size_t t = 0; t < n && count > 0; ++t) {
        std::swap(pool[t], pool[t + uniform_below(rng, n - t)]);
        const NeuronId id = pool[t];
        if (!chosen[id]) {
            chosen[id] = 1;
            out.push_back(id);
            --count;
        }
    }
}

}  // namespace

void LayerTrace::validate() const {
    if (bundle_width != 2 && bundle_width != 3) {
        throw Error(ErrorKind::invalid_argument,
                    fmt::format("bundle_width must be 2 or 3, got {}", bundle_width));
    }
    for (std::size_t t = 0; t < tokens.size(); ++t) {
        const auto& ids = tokens[t];
        for (std::size_t k = 0; k < ids.size(); ++k) {
            if (ids[k] >= neuron_count) {
                throw Error(ErrorKind::invalid_argument,
                            fmt::format("token {}: neuron id {} out of range [0, {})", t,
                                        ids[k], neuron_count));
            }
            if (k > 0 && ids[k] <= ids[k - 1]) {
                throw Error(ErrorKind::invalid_argument,
                            fmt::format("token {}: ids must be strictly ascending", t));
            }
        }
    }
}

LayerTrace LayerTrace::slice(std::size_t begin, std::size_t end) const {
    end = std::min(end, tokens.size());
    begin = std::min(begin, end);
    LayerTrace out{layer_id, neuron_count, bundle_width, {}};
    out.tokens.assign(tokens.begin() + static_cast<std::ptrdiff_t>(begin),
                      tokens.begin() + static_cast<std::ptrdiff_t>(end));
    return out;
}

std::uint64_t fingerprint(const LayerTrace& trace) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xffU;
            h *= 1099511628211ULL;
        }
    };
    mix(trace.layer_id);
    mix(trace.neuron_count);
    mix(trace.bundle_width);
    mix(trace.tokens.size());
    for (const auto& token : trace.tokens) {
        mix(token.size());
        for (NeuronId id : token) mix(id);
    }
    return h;
}

void SyntheticTraceSpec::validate() const {
    if (neuron_count == 0) {
        throw Error(ErrorKind::invalid_argument, "neuron_count must be positive");
    }
    if (!(target_sparsity > 0.0 && target_sparsity <= 1.0)) {
        throw Error(ErrorKind::invalid_argument,
                    fmt::format("target_sparsity must lie in (0, 1], got {}", target_sparsity));
    }
    if (target_sparsity * neuron_count < 1.0) {
        throw Error(ErrorKind::invalid_argument,
                    fmt::format("target_sparsity x neuron_count = {} activates less than one neuron",
                                target_sparsity * neuron_count));
    }
    if (cluster_count < 1 || cluster_count > neuron_count) {
        throw Error(ErrorKind::invalid_argument,
                    fmt::format("cluster_count must lie in [1, {}], got {}", neuron_count,
                                cluster_count));
    }
    if (!(cluster_fidelity >= 0.0 && cluster_fidelity <= 1.0)) {
        throw Error(ErrorKind::invalid_argument,
                    fmt::format("cluster_fidelity must lie in [0, 1], got {}", cluster_fidelity));
    }
    if (bundle_width != 2 && bundle_width != 3) {
        throw Error(ErrorKind::invalid_argument, "bundle_width must be 2 or 3");
    }
}

std::vector<std::vector<NeuronId>> cluster_partition(const SyntheticTraceSpec& spec) {
    spec.validate();
    Rng rng = generator_rng(spec.seed);
    return draw_partition(rng, spec);
}

LayerTrace generate_clustered_trace(const SyntheticTraceSpec& spec) {
    spec.validate();
    Rng rng = generator_rng(spec.seed);
    const auto clusters = draw_partition(rng, spec);

    const std::size_t n = spec.neuron_count;
    const double expected = spec.target_sparsity * static_cast<double>(n);
    const double whole = std::floor(expected);
    const double frac = expected - whole;

    LayerTrace trace{spec.layer_id, spec.neuron_count, spec.bundle_width, {}};
    trace.tokens.reserve(spec.token_count);

    std::vector<NeuronId> pool(n);
    std::iota(pool.begin(), pool.end(), NeuronId{0});
    std::vector<char> chosen(n, 0);
    std::vector<NeuronId> members;

    for (std::uint32_t t = 0; t < spec.token_count; ++t) {
        // Stochastic rounding keeps the mean activation count exact.
        std::size_t k = static_cast<std::size_t>(whole) + (uniform01(rng) < frac ? 1 : 0);
        k = std::clamp<std::size_t>(k, 1, n);

        TokenActivation token;
        token.reserve(k);
        if (uniform01(rng) < spec.cluster_fidelity) {
            members = clusters[uniform_below(rng, clusters.size())];
            const std::size_t core = std::min(
                members.size(),
                static_cast<std::size_t>(std::lround(static_cast<double>(k) * kClusterCoreShare)));
            for (std::size_t i = 0; i < core; ++i) {
                std::swap(members[i], members[i + uniform_below(rng, members.size() - i)]);
                chosen[members[i]] = 1;
                token.push_back(members[i]);
            }
        }
        draw_unmarked(rng, pool, chosen, k - token.size(), token);
        for (NeuronId id : token) chosen[id] = 0;
        std::sort(token.begin(), token.end());
        trace.tokens.push_back(std::move(token));
    }
    return trace;
}

void write_trace(const LayerTrace& trace, std::ostream& out) {
    trace.validate();
    nlohmann::json header = {{"layer_id", trace.layer_id},
                             {"neuron_count", trace.neuron_count},
                             {"bundle_width", trace.bundle_width}};
    out << header.dump() << '\n';
    for (const auto& token : trace.tokens) {
        out << '[';
        for (std::size_t k = 0; k < token.size(); ++k) {
            if (k) out << ',';
            out << token[k];
        }
        out << "]\n";
    }
    if (!out) throw Error(ErrorKind::io, "failed writing trace");
}

void write_trace(const LayerTrace& trace, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::io, fmt::format("cannot open {} for writing", path.string()));
    write_trace(trace, out);
}

namespace {

[[noreturn]] void parse_fail(std::size_t line, const std::string& what) {
    throw Error(ErrorKind::parse, fmt::format("trace line {}: {}", line, what));
}

std::uint32_t header_field(const nlohmann::json& header, const char* key, std::size_t line) {
    auto it = header.find(key);
    if (it == header.end() || !it->is_number_unsigned()) {
        parse_fail(line, fmt::format("header field '{}' missing or not a non-negative integer", key));
    }
    const auto v = it->get<std::uint64_t>();
    if (v > UINT32_MAX) parse_fail(line, fmt::format("header field '{}' too large", key));
    return static_cast<std::uint32_t>(v);
}

}  // namespace

LayerTrace read_trace(std::istream& in) {
    std::string text;
    std::size_t line_no = 0;
    LayerTrace trace;
    bool have_header = false;
    while (std::getline(in, text)) {
        ++line_no;
        if (!text.empty() && text.back() == '\r') text.pop_back();
        if (text.empty()) {
            parse_fail(line_no, "empty line");
        }
        nlohmann::json value;
        try {
            value = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            parse_fail(line_no, fmt::format("malformed JSON ({})", e.what()));
        }
        if (!have_header) {
            if (!value.is_object()) parse_fail(line_no, "expected header object");
            for (const auto& [key, _] : value.items()) {
                if (key != "layer_id" && key != "neuron_count" && key != "bundle_width") {
                    parse_fail(line_no, fmt::format("unknown header field '{}'", key));
                }
            }
            trace.layer_id = header_field(value, "layer_id", line_no);
            trace.neuron_count = header_field(value, "neuron_count", line_no);
            trace.bundle_width = header_field(value, "bundle_width", line_no);
            if (trace.bundle_width != 2 && trace.bundle_width != 3) {
                parse_fail(line_no, "bundle_width must be 2 or 3");
            }
            have_header = true;
            continue;
        }
        if (!value.is_array()) parse_fail(line_no, "expected an array of neuron ids");
        TokenActivation token;
        token.reserve(value.size());
        for (const auto& item : value) {
            if (!item.is_number_unsigned()) parse_fail(line_no, "neuron id is not a non-negative integer");
            const auto id = item.get<std::uint64_t>();
            if (id >= trace.neuron_count) {
                parse_fail(line_no, fmt::format("neuron id {} out of range [0, {})", id,
                                                trace.neuron_count));
            }
            if (!token.empty() && id == token.back()) {
                parse_fail(line_no, fmt::format("duplicate neuron id {}", id));
            }
            if (!token.empty() && id < token.back()) {
                parse_fail(line_no, "neuron ids must be in ascending order");
            }
            token.push_back(static_cast<NeuronId>(id));
        }
        trace.tokens.push_back(std::move(token));
    }
    if (!have_header) parse_fail(line_no + 1, "missing header line");
    return trace;
}

LayerTrace read_trace(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, fmt::format("cannot open {}", path.string()));
    return read_trace(in);
}

}  // namespace ripplekit
