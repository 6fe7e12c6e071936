// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "cli.hpp"
#include "helpers.hpp"
#include "oracles.hpp"
#include "ripplekit/access.hpp"
#include "ripplekit/cache.hpp"
#include "ripplekit/flashsim.hpp"
#include "ripplekit/harness.hpp"
#include "ripplekit/placement.hpp"
#include "ripplekit/stats.hpp"
#include "ripplekit/trace.hpp"

using namespace ripplekit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Workload shared by criteria 3 and 4.
constexpr std::uint32_t kNeurons = 4096;
constexpr std::uint32_t kTokens = 2000;
constexpr std::uint64_t kSeeds[] = {1, 2, 3, 4, 5};

Workload workload_for(std::uint64_t seed) {
    return Workload(generate_clustered_trace(testutil::clustered(kNeurons, kTokens, 0.1, 8, 0.9, seed)));
}

std::vector<Workload>& workloads() {
    static std::vector<Workload> all = [] {
        std::vector<Workload> w;
        for (std::uint64_t seed : kSeeds) w.push_back(workload_for(seed));
        return w;
    }();
    return all;
}

Outcome c1_oracle_bound() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(1);
    int violations = 0;
    for (int k = 0; k < 200; ++k) {
        const auto n = static_cast<std::uint32_t>(5 + k % 5);
        const CoActivationStats s = testutil::random_stats(n, rng, 9);
        if (adjacent_pair_count(s, greedy_search(s)) > adjacent_pair_count(s, brute_force_optimal(s))) {
            ++violations;
        }
    }
    int matches = 0, blocks = 0;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto n = static_cast<std::uint32_t>(5 + seed % 5);
        auto spec = testutil::clustered(n, 60, 0.4, 2, 1.0, seed);
        const CoActivationStats s = extract_stats(generate_clustered_trace(spec));
        const std::uint64_t greedy = adjacent_pair_count(s, greedy_search(s));
        const std::uint64_t best = adjacent_pair_count(s, brute_force_optimal(s));
        if (greedy > best) ++violations;
        matches += greedy == best;
        ++blocks;
    }
    const double share = static_cast<double>(matches) / blocks;
    const double secs = seconds_since(t0);
    return {violations == 0 && share >= 0.6 && secs < 60.0,
            fmt::format("{} violations, block-structured optimum matched {}/{} ({:.1f}%), {:.2f} s",
                        violations, matches, blocks, share * 100, secs)};
}

Outcome c2_cluster_contiguity() {
    const auto spec = testutil::clustered(200, 400, 0.1, 10, 1.0, 3);
    const Placement p = greedy_search(extract_stats(generate_clustered_trace(spec)));
    std::size_t worst = 0;
    const auto clusters = cluster_partition(spec);
    for (const auto& members : clusters) worst = std::max(worst, count_extents(p, members));
    return {worst == 1, fmt::format("{} clusters, max extents per cluster {}", clusters.size(), worst)};
}

ExperimentSpec bare(const std::string& strategy) {
    ExperimentSpec s;
    s.strategy = StrategySpec::parse(strategy);
    s.profile = preset_profile("ufs40");
    s.cache_ratio = 0.0;
    s.collapse.enabled = false;
    return s;
}

Outcome c3_extent_length() {
    std::uint64_t greedy_bundles = 0, greedy_ops = 0, shuffled_bundles = 0, shuffled_ops = 0;
    std::uint64_t tokens = 0;
    std::string per_seed;
    for (std::size_t k = 0; k < workloads().size(); ++k) {
        Workload& w = workloads()[k];
        const RunReport g = run_experiment(w, bare("greedy"));
        const RunReport s = run_experiment(w, bare(fmt::format("shuffled:{}", kSeeds[k])));
        for (const auto& r : g.records) {
            if (r.warmup) continue;
            greedy_bundles += r.bundles_read;
            greedy_ops += r.io_ops;
            ++tokens;
        }
        for (const auto& r : s.records) {
            if (r.warmup) continue;
            shuffled_bundles += r.bundles_read;
            shuffled_ops += r.io_ops;
        }
        per_seed += fmt::format(" {:.2f}", g.summary.aggregates.mean_extent_len / s.summary.aggregates.mean_extent_len);
    }
    const double greedy = static_cast<double>(greedy_bundles) / greedy_ops;
    const double shuffled = static_cast<double>(shuffled_bundles) / shuffled_ops;
    const double ratio = greedy / shuffled;
    return {ratio >= 2.0 && tokens / workloads().size() >= 500,
            fmt::format("mean extent {:.3f} vs {:.3f} bundles, ratio {:.3f} over {} tokens (per seed:{})",
                        greedy, shuffled, ratio, tokens, per_seed)};
}

Outcome c4_latency_ordering() {
    ExperimentSpec base;
    base.profile = preset_profile("ufs40");
    base.cache_ratio = 0.1;
    double lat[4] = {0, 0, 0, 0};
    std::string per_seed;
    for (std::size_t k = 0; k < workloads().size(); ++k) {
        base.cache.seed = kSeeds[k];
        const auto reports = run_ablation(workloads()[k], base, kSeeds[k]);
        for (int a = 0; a < 4; ++a) lat[a] += reports[a].summary.aggregates.mean_latency;
        per_seed += fmt::format(" {:.2f}", reports[0].summary.aggregates.mean_latency /
                                               reports[3].summary.aggregates.mean_latency);
    }
    const double baseline = lat[0], offline = lat[1], online = lat[2], full = lat[3];
    const double speedup = baseline / full;
    const double n = static_cast<double>(workloads().size());
    return {full < offline && offline < baseline && speedup >= 1.5,
            fmt::format("mean latency baseline {:.1f} us, offline {:.1f} us, online {:.1f} us, full {:.1f} us; "
                        "speedup {:.3f} (per seed:{})",
                        baseline / n * 1e6, offline / n * 1e6, online / n * 1e6, full / n * 1e6, speedup,
                        per_seed)};
}

Outcome c5_collapse_safety() {
    std::mt19937_64 rng(5);
    std::vector<FlashModel> grid;
    for (double op : {2e-5, 1e-4, 3e-4, 1e-3}) {
        for (double bw : {5e8, 1.45e9, 2.9e9, 6e9}) {
            for (std::uint32_t qd : {1u, 4u, 32u}) {
                for (std::uint64_t bundle : {2048u, 4096u, 6144u}) {
                    FlashModel m;
                    m.op_latency = op;
                    m.max_bandwidth = bw;
                    m.queue_depth = qd;
                    m.bundle_bytes = bundle;
                    if (analytic_threshold(m) >= 1) grid.push_back(m);
                }
            }
        }
    }
    std::uint64_t plans = 0, checks = 0, violations = 0;
    while (plans < 12000) {
        ReadPlan p;
        std::uint32_t at = static_cast<std::uint32_t>(rng() % 8);
        const auto extents = static_cast<std::uint32_t>(rng() % 40 + 1);
        for (std::uint32_t e = 0; e < extents; ++e) {
            const auto len = static_cast<std::uint32_t>(rng() % 8 + 1);
            p.extents.push_back({at, len});
            p.activated_neurons += len;
            at += len + static_cast<std::uint32_t>(rng() % 40 + 1);
        }
        const FlashModel& m = grid[rng() % grid.size()];
        if (!is_iops_bound(p, m)) continue;
        ++plans;
        const double base = simulate(p, m).latency;
        const std::uint32_t top = std::min<std::uint32_t>(analytic_threshold(m), 41);
        for (std::uint32_t t = 0; t <= top; ++t) {
            ++checks;
            violations += simulate(collapse(p, t), m).latency > base * (1 + 1e-12);
        }
    }
    return {violations == 0 && plans >= 10000,
            fmt::format("{} IOPS-bound plans over {} models, {} threshold checks, {} violations", plans,
                        grid.size(), checks, violations)};
}

Outcome c6_expected_ops() {
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        std::mt19937_64 rng(seed);
        const auto n = static_cast<std::uint32_t>(rng() % 60 + 2);
        const LayerTrace trace = testutil::random_trace(n, 40, 0.3, rng);
        const CoActivationStats s = extract_stats(trace);
        const oracle::NaiveCounts naive = oracle::recount(trace);
        for (const Placement& p : {Placement::shuffled(n, seed), greedy_search(s)}) {
            const IoCostEstimate e = evaluate_expected_ops(s, p);
            double singles = 0.0;
            for (auto f : naive.single) singles += static_cast<double>(f);
            double indiv = 0.0;
            for (auto f : naive.single) indiv += static_cast<double>(f) / singles;
            double gain = 0.0;
            for (std::size_t q = 0; q + 1 < n; ++q) {
                const NeuronId a = p.at(static_cast<Position>(q)), b = p.at(static_cast<Position>(q + 1));
                if (naive.pair_total > 0) {
                    gain += static_cast<double>(naive.pair(a, b)) / static_cast<double>(naive.pair_total);
                }
            }
            worst = std::max({worst, std::abs(e.expected_ops_coactivated - (e.expected_ops_individual - e.adjacency_gain)),
                              std::abs(e.expected_ops_individual - indiv), std::abs(e.adjacency_gain - gain)});
        }
    }
    int wins = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const auto spec = testutil::clustered(256, 200, 0.1, 4, 0.9, seed);
        const CoActivationStats s = extract_stats(generate_clustered_trace(spec));
        wins += evaluate_expected_ops(s, greedy_search(s)).adjacency_gain >=
                evaluate_expected_ops(s, Placement::identity(256)).adjacency_gain;
    }
    return {worst <= 1e-9 && wins >= 95,
            fmt::format("max identity error {:.3g}, greedy gain >= identity gain in {}/100 trials", worst, wins)};
}

double median_search_seconds(std::uint32_t n) {
    const CoActivationStats s =
        extract_stats(generate_clustered_trace(testutil::clustered(n, 1000, 0.1, 8, 0.9, n)));
    std::vector<double> times;
    for (int k = 0; k < 5; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        const Placement p = greedy_search(s);
        times.push_back(seconds_since(t0));
        if (p.size() != n) return -1.0;
    }
    std::sort(times.begin(), times.end());
    return times[2];
}

Outcome c7_search_scaling() {
    const double t512 = median_search_seconds(512);
    const double t1024 = median_search_seconds(1024);
    const double ratio = t1024 / t512;
    return {t512 > 0 && ratio <= 5.0,
            fmt::format("median {:.4f} s at N=512, {:.4f} s at N=1024, ratio {:.2f}", t512, t1024, ratio)};
}

Outcome c8_knee() {
    const FlashModel m = preset_profile("ufs40").model_for(2);
    const double knee = m.derived_knee_bytes();
    const auto bundles = static_cast<std::uint32_t>(std::lround(knee / static_cast<double>(m.bundle_bytes)));
    ReadPlan at_knee;
    at_knee.extents.push_back({0, bundles});
    at_knee.activated_neurons = bundles;
    const double bw = simulate(at_knee, m).effective_bandwidth;
    const double rel = std::abs(bw - m.max_bandwidth / 2) / (m.max_bandwidth / 2);
    bool monotone = true;
    double prev = 0.0;
    for (std::uint32_t len = 1; len <= 8192; ++len) {
        ReadPlan p;
        p.extents.push_back({0, len});
        p.activated_neurons = len;
        const double b = simulate(p, m).effective_bandwidth;
        monotone = monotone && b >= prev;
        prev = b;
    }
    return {rel <= 0.05 && monotone,
            fmt::format("knee {:.0f} B ({} bundles): {:.4g} B/s vs B_max/2 {:.4g} B/s ({:.2f}% off), curve {}",
                        knee, bundles, bw, m.max_bandwidth / 2, rel * 100,
                        monotone ? "monotone" : "not monotone")};
}

Outcome c9_determinism() {
    const fs::path dir = fs::temp_directory_path() / "ripplekit_acceptance_c9";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::string trace = (dir / "t.jsonl").string();
    std::ostringstream sink;
    if (cli::run({"ripplekit", "gen-trace", "--out", trace, "--neurons", "1024", "--tokens", "400"}, sink, sink) != 0) {
        return {false, "gen-trace failed: " + sink.str()};
    }
    auto simulate_once = [&] {
        const std::vector<std::string> args{"ripplekit", "simulate", "--trace", trace, "--ablation",
                                            "--seed", "9", "--out-dir", (dir / "runs").string()};
        std::vector<std::string> csvs;
        if (cli::run(args, sink, sink) != 0) return csvs;
        for (const char* arm : {"baseline", "offline", "online", "full"}) {
            std::ifstream in(dir / "runs" / fmt::format("{}.csv", arm), std::ios::binary);
            csvs.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        }
        return csvs;
    };
    const auto a = simulate_once();
    const auto b = simulate_once();
    fs::remove_all(dir);
    const bool ok = a.size() == 4 && a == b && !a[0].empty();
    return {ok, ok ? "4 arm CSVs byte-identical across two runs" : "CSV outputs differ or simulate failed"};
}

Outcome c10_cache_fuzz() {
    constexpr std::uint32_t kIds = 512;
    std::uint64_t ops = 0, hits = 0, mismatches = 0, overflow = 0;
    for (std::uint64_t round = 0; round < 4; ++round) {
        std::mt19937_64 rng(round + 40);
        CacheConfig c;
        c.capacity_neurons = static_cast<std::uint32_t>(16 + 24 * round);
        c.admit_prob_sporadic = 0.5 + 0.15 * static_cast<double>(round);
        c.admit_prob_segment = 0.25;
        c.ghost_bypass = round != 2;
        c.ghost_size = round == 3 ? 9 : 0;
        c.seed = round;
        LinkingCache cache(kIds, c);
        oracle::ReferenceCache ref(c);
        // Skewed ids so entries get reused and promoted.
        std::geometric_distribution<std::uint32_t> hot(0.02);
        auto id = [&] { return static_cast<NeuronId>((hot(rng) * 37) % kIds); };
        for (int k = 0; k < 250000; ++k, ++ops) {
            const auto kind = rng() % 4;
            if (kind < 2) {
                const NeuronId n = id();
                const bool hit = cache.lookup_and_touch(n);
                mismatches += hit != ref.lookup(n);
                hits += hit;
            } else if (kind == 2) {
                const NeuronId n = id();
                cache.admit(n, AdmissionClass::sporadic);
                const NeuronId unit[] = {n};
                ref.admit(unit, false);
            } else {
                std::vector<NeuronId> seg;
                const NeuronId start = id();
                const auto len = static_cast<NeuronId>(rng() % 10 + 1);
                for (NeuronId n = start; n < std::min(kIds, start + len); ++n) seg.push_back(n);
                cache.admit(seg, AdmissionClass::segment);
                ref.admit(seg, true);
            }
            overflow += cache.resident_count() > c.capacity_neurons;
            mismatches += cache.resident_count() != ref.size();
        }
    }
    return {ops >= 1000000 && mismatches == 0 && overflow == 0,
            fmt::format("{} ops, {} hits, {} capacity overflows, {} mismatches against the reference", ops, hits,
                        overflow, mismatches)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 greedy vs brute-force optimum", c1_oracle_bound},
        {"2 cluster contiguity", c2_cluster_contiguity},
        {"3 continuous-access improvement", c3_extent_length},
        {"4 end-to-end latency ordering", c4_latency_ordering},
        {"5 collapse safety", c5_collapse_safety},
        {"6 expected-ops consistency", c6_expected_ops},
        {"7 search scaling", c7_search_scaling},
        {"8 simulator knee", c8_knee},
        {"9 determinism", c9_determinism},
        {"10 cache correctness fuzz", c10_cache_fuzz},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, fmt::format("threw: {}", e.what())};
        }
        failed += !o.pass;
        std::cout << fmt::format("{} criterion {}: {} [{:.1f} s]", o.pass ? "PASS" : "FAIL", name, o.detail,
                                 seconds_since(t0))
                  << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
