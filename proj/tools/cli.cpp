#include "cli.hpp"

#include <atomic>
#include <chrono>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <thread>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ripplekit/config.hpp"
#include "ripplekit/error.hpp"
#include "ripplekit/flashsim.hpp"
#include "ripplekit/harness.hpp"
#include "ripplekit/placement.hpp"
#include "ripplekit/stats.hpp"
#include "ripplekit/trace.hpp"

namespace ripplekit::cli {
namespace {

namespace fs = std::filesystem;

struct Logger {
    LogLevel level;
    std::ostream& err;

    template <typename... Args>
    void info(fmt::format_string<Args...> f, Args&&... args) const {
        if (level >= LogLevel::info) err << fmt::format(f, std::forward<Args>(args)...) << '\n';
    }
    template <typename... Args>
    void debug(fmt::format_string<Args...> f, Args&&... args) const {
        if (level >= LogLevel::debug) err << fmt::format(f, std::forward<Args>(args)...) << '\n';
    }
};

// --config must be known before the other flags get their defaults.
std::optional<fs::path> find_config_flag(const std::vector<std::string>& args) {
    for (std::size_t k = 1; k < args.size(); ++k) {
        if (args[k] == "--config" && k + 1 < args.size()) return fs::path(args[k + 1]);
        if (args[k].rfind("--config=", 0) == 0) return fs::path(args[k].substr(9));
    }
    return std::nullopt;
}

std::string label_for(const StrategySpec& s) {
    switch (s.kind) {
        case StrategySpec::Kind::identity: return "identity";
        case StrategySpec::Kind::greedy: return "greedy";
        case StrategySpec::Kind::shuffled: return fmt::format("shuffled-{}", s.seed);
        case StrategySpec::Kind::file: return "file-" + s.path.stem().string();
    }
    return "run";
}

void print_summary(std::ostream& out, const RunSummary& s) {
    const RunAggregates& a = s.aggregates;
    out << fmt::format(
        "{}: {} tokens, latency {:.2f} us/token, {:.1f} ops/token, effective bandwidth {:.1f} MB/s, "
        "mean extent {:.2f}, max extent {}, hit rate {:.3f}, speculative {:.3f}\n",
        s.label, a.tokens, a.mean_latency * 1e6, a.mean_io_ops, a.effective_bandwidth / 1e6,
        a.mean_extent_len, a.max_extent_len, a.hit_rate, a.speculative_fraction);
}

struct GenArgs {
    std::string out;
    SyntheticTraceSpec spec;
};

struct StatsArgs {
    std::string trace;
    std::string out;
    double train_fraction = 0.5;
    unsigned jobs = 1;
};

struct SearchArgs {
    std::vector<std::string> stats;
    std::string out;
    std::string out_dir;
    unsigned jobs = 1;
};

struct SimulateArgs {
    std::string trace;
    std::vector<std::string> strategies;
    std::vector<std::string> placements;
    bool ablation = false;
    std::string profile;
    double cache_ratio = 0.1;
    std::optional<double> collapse_threshold;
    bool no_collapse = false;
    std::string admission;
    std::uint64_t seed = 0;
    double train_fraction = 0.5;
    double warmup_fraction = 0.1;
    std::string out_dir;
};

struct CompareArgs {
    std::vector<std::string> summaries;
    std::string baseline;
};

struct CalibrateArgs {
    std::string points;
    std::uint32_t queue_depth = kUfsQueueDepth;
    std::uint64_t bundle_bytes = 4096;
    std::string name = "calibrated";
    std::string out;
};

int cmd_gen_trace(const GenArgs& a, const Logger& log, std::ostream& out) {
    const LayerTrace trace = generate_clustered_trace(a.spec);
    write_trace(trace, fs::path(a.out));
    out << fmt::format("wrote {} tokens over {} neurons to {}\n", trace.tokens.size(),
                       trace.neuron_count, a.out);
    log.debug("trace fingerprint {:016x}", fingerprint(trace));
    return 0;
}

int cmd_stats(const StatsArgs& a, const Logger& log, std::ostream& out) {
    if (!(a.train_fraction > 0.0 && a.train_fraction <= 1.0)) {
        throw Error(ErrorKind::config, "--train-fraction must lie in (0, 1]");
    }
    const LayerTrace trace = read_trace(fs::path(a.trace));
    const auto end = std::max<std::size_t>(
        1, static_cast<std::size_t>(a.train_fraction * static_cast<double>(trace.tokens.size())));
    const CoActivationStats stats = extract_stats(trace.slice(0, std::min(end, trace.tokens.size())),
                                                  std::max(1u, a.jobs));
    write_stats(stats, fs::path(a.out));
    out << fmt::format("layer {}: {} tokens, {} neurons, {} co-activated pairs -> {}\n",
                       stats.layer_id(), stats.token_count(), stats.neuron_count(),
                       stats.pairs().size(), a.out);
    log.debug("pair total {}", stats.pair_total());
    return 0;
}

int cmd_search(const SearchArgs& a, const CliConfig& config, const Logger& log, std::ostream& out) {
    if (a.stats.size() > 1 && !a.out.empty()) {
        throw Error(ErrorKind::config, "--out takes a single --stats; use --out-dir for several");
    }
    struct Job {
        fs::path input;
        fs::path output;
        CoActivationStats stats;
        std::optional<Placement> placement;
        double seconds = 0.0;
        std::string failure;
    };
    std::vector<Job> jobs;
    std::set<fs::path> outputs;
    for (const auto& s : a.stats) {
        Job j;
        j.input = s;
        j.stats = read_stats(j.input);
        if (j.stats.neuron_count() > config.search_max_neurons) {
            throw Error(ErrorKind::size_limit,
                        fmt::format("{} has {} neurons, above search.max_neurons = {}", s,
                                    j.stats.neuron_count(), config.search_max_neurons));
        }
        j.output = !a.out.empty()
                       ? fs::path(a.out)
                       : fs::path(a.out_dir) / fmt::format("placement_layer{}.json", j.stats.layer_id());
        if (!outputs.insert(j.output).second) {
            throw Error(ErrorKind::config, fmt::format("two inputs would write {}", j.output.string()));
        }
        jobs.push_back(std::move(j));
    }

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            Job& j = jobs[k];
            try {
                const auto t0 = std::chrono::steady_clock::now();
                j.placement = greedy_search(j.stats);
                j.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            } catch (const std::exception& e) {
                j.failure = e.what();
            }
        }
    };
    {
        const unsigned n = std::clamp<unsigned>(a.jobs, 1, static_cast<unsigned>(jobs.size()));
        std::vector<std::jthread> pool;
        for (unsigned t = 1; t < n; ++t) pool.emplace_back(worker);
        worker();
    }

    for (const Job& j : jobs) {
        if (!j.failure.empty()) {
            throw Error(ErrorKind::invalid_argument, fmt::format("{}: {}", j.input.string(), j.failure));
        }
        if (j.output.has_parent_path()) fs::create_directories(j.output.parent_path());
        write_placement(*j.placement, j.stats.layer_id(), j.output);
        const IoCostEstimate est = evaluate_expected_ops(j.stats, *j.placement);
        out << fmt::format("search layer {}: {} neurons, {} pairs, {:.6f} s, adjacency gain {:.6f} -> {}\n",
                           j.stats.layer_id(), j.stats.neuron_count(), j.stats.pairs().size(),
                           j.seconds, est.adjacency_gain, j.output.string());
    }
    log.debug("searched {} layer(s) with {} job(s)", jobs.size(), a.jobs);
    return 0;
}

int cmd_simulate(const SimulateArgs& a, const CliConfig& config, const Logger& log,
                 std::ostream& out) {
    ExperimentSpec base;
    base.profile = config.resolve_profile(a.profile);
    base.cache_ratio = a.cache_ratio;
    base.cache = config.cache;
    base.cache.seed = a.seed;
    base.admission = a.admission.empty() ? config.admission : parse_admission_mode(a.admission);
    base.collapse = a.collapse_threshold ? CollapseSettings::pinned(*a.collapse_threshold)
                                         : config.collapse;
    if (a.no_collapse) base.collapse.enabled = false;
    base.train_fraction = a.train_fraction;
    base.warmup_fraction = a.warmup_fraction;

    std::vector<ExperimentSpec> specs;
    if (a.ablation) {
        if (!a.strategies.empty() || !a.placements.empty()) {
            throw Error(ErrorKind::config, "--ablation does not combine with --strategy or --placement");
        }
        specs = ablation_arms(base, a.seed);
    } else {
        std::vector<StrategySpec> strategies;
        for (const auto& s : a.strategies) strategies.push_back(StrategySpec::parse(s, a.seed));
        for (const auto& p : a.placements) strategies.push_back(StrategySpec::parse("file:" + p));
        if (strategies.empty()) strategies.push_back(StrategySpec::parse("greedy"));
        std::map<std::string, int> seen;
        for (const auto& s : strategies) {
            ExperimentSpec spec = base;
            spec.strategy = s;
            spec.label = label_for(s);
            if (const int n = seen[spec.label]++; n > 0) spec.label += fmt::format("-{}", n + 1);
            specs.push_back(std::move(spec));
        }
    }
    for (const auto& spec : specs) spec.validate();

    Workload workload(read_trace(fs::path(a.trace)), a.train_fraction);
    log.debug("trace {:016x}: {} tokens, split at {}", workload.fingerprint(),
              workload.trace().tokens.size(), workload.split());

    std::vector<RunSummary> summaries;
    for (const auto& spec : specs) {
        const RunReport report = run_experiment(workload, spec);
        const auto [csv, json] = write_report(report, fs::path(a.out_dir));
        print_summary(out, report.summary);
        log.info("wrote {} and {}", csv.string(), json.string());
        summaries.push_back(report.summary);
    }
    if (summaries.size() > 1) out << format_table(compare(summaries, summaries.front().label));
    return 0;
}

int cmd_compare(const CompareArgs& a, std::ostream& out) {
    std::vector<RunSummary> summaries;
    for (const auto& p : a.summaries) summaries.push_back(read_summary(fs::path(p)));
    if (summaries.size() < 2) throw Error(ErrorKind::invalid_argument, "compare needs at least two summaries");
    const std::string baseline = a.baseline.empty() ? summaries.front().label : a.baseline;
    out << format_table(compare(summaries, baseline));
    return 0;
}

int cmd_calibrate(const CalibrateArgs& a, const Logger& log, std::ostream& out) {
    const std::vector<CurvePoint> points = read_curve_points(a.points);
    const CalibrationResult fit = calibrate_from_curve(points, a.queue_depth, a.bundle_bytes);
    HardwareProfile profile;
    profile.name = a.name;
    profile.op_latency = fit.model.op_latency;
    profile.max_bandwidth = fit.model.max_bandwidth;
    profile.queue_depth = fit.model.queue_depth;
    profile.bundle_bytes = a.bundle_bytes;
    out << fmt::format(
        "op_latency {:.6g} s, max_bandwidth {:.6g} B/s, knee {:.6g} B, rms residual {:.6g} B/s "
        "({:.3f}%)\n",
        profile.op_latency, profile.max_bandwidth, fit.model.derived_knee_bytes(), fit.rms_residual,
        fit.relative_residual * 100);
    if (fit.bandwidth_unbounded) {
        log.info("warning: points never approach saturation; max_bandwidth is only a lower bound");
    }
    if (!a.out.empty()) {
        std::ofstream f(a.out);
        if (!f) throw Error(ErrorKind::io, fmt::format("cannot write {}", a.out));
        write_profile(profile, f);
        log.info("wrote {}", a.out);
    } else {
        write_profile(profile, out);
    }
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CliConfig config;
    try {
        config = load_config_from(find_config_flag(args));
    } catch (const std::exception& e) {
        err << "ripplekit: error: " << e.what() << '\n';
        return 1;
    }

    CLI::App app{"ripplekit: co-activation aware neuron placement and flash I/O simulation"};
    app.option_defaults()->always_capture_default();
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);
    std::string config_path;
    std::string log_level;
    app.add_option("--config", config_path,
                   "JSON config file (default: $RIPPLEKIT_CONFIG, else built-in defaults)");
    app.add_option("--log-level", log_level, "quiet, info or debug (overrides the config)");

    GenArgs gen;
    gen.spec.neuron_count = config.gen_neuron_count;
    gen.spec.token_count = config.gen_token_count;
    gen.spec.target_sparsity = config.gen_sparsity;
    gen.spec.cluster_count = config.gen_cluster_count;
    gen.spec.cluster_fidelity = config.gen_fidelity;
    gen.spec.bundle_width = config.gen_bundle_width;
    auto* g = app.add_subcommand("gen-trace", "Generate a clustered synthetic activation trace");
    g->add_option("--out", gen.out, "Output trace file (JSONL)")->required();
    g->add_option("--neurons", gen.spec.neuron_count, "Neurons in the layer");
    g->add_option("--tokens", gen.spec.token_count, "Tokens to generate");
    g->add_option("--sparsity", gen.spec.target_sparsity, "Mean fraction of neurons activated per token");
    g->add_option("--clusters", gen.spec.cluster_count, "Hidden co-activation clusters");
    g->add_option("--fidelity", gen.spec.cluster_fidelity, "Probability a token follows a cluster");
    g->add_option("--seed", gen.spec.seed, "Generator seed");
    g->add_option("--layer", gen.spec.layer_id, "Layer id recorded in the trace");
    g->add_option("--bundle-width", gen.spec.bundle_width, "Matrices bound per bundle (2 or 3)");

    StatsArgs st;
    st.train_fraction = config.train_fraction;
    auto* s = app.add_subcommand("stats", "Count activations and co-activations of a trace");
    s->add_option("--trace", st.trace, "Input trace file")->required();
    s->add_option("--out", st.out, "Output stats file (JSON)")->required();
    s->add_option("--train-fraction", st.train_fraction,
                  "Leading share of tokens to count (1 counts the whole trace)");
    s->add_option("--jobs", st.jobs, "Counting threads");

    SearchArgs se;
    se.out_dir = config.out_dir.string();
    auto* sr = app.add_subcommand("search", "Greedy placement search over co-activation stats");
    sr->add_option("--stats", se.stats, "Stats file; repeat for several layers")->required();
    sr->add_option("--out", se.out, "Output placement file (single --stats only)");
    sr->add_option("--out-dir", se.out_dir, "Directory for placement_layer<L>.json files");
    sr->add_option("--jobs", se.jobs, "Layers searched in parallel");

    SimulateArgs si;
    si.profile = config.profile;
    si.cache_ratio = config.cache_ratio;
    si.train_fraction = config.train_fraction;
    si.warmup_fraction = config.warmup_fraction;
    si.out_dir = config.out_dir.string();
    auto* sm = app.add_subcommand("simulate", "Replay a trace through cache, planner and flash model");
    sm->add_option("--trace", si.trace, "Input trace file")->required();
    sm->add_option("--strategy", si.strategies,
                   "identity, greedy, shuffled[:seed] or file:<path>; repeat for several arms "
                   "(default greedy)");
    sm->add_option("--placement", si.placements, "Placement file to replay; repeatable");
    sm->add_flag("--ablation", si.ablation, "Run the baseline/offline/online/full arms");
    sm->add_option("--profile", si.profile, "Hardware profile name or profile file");
    sm->add_option("--cache-ratio", si.cache_ratio, "Cache capacity as a share of the layer");
    sm->add_option("--collapse-threshold", si.collapse_threshold,
                   "Pin the collapse gap threshold in bundles (default: break-even for the profile)");
    sm->add_flag("--no-collapse", si.no_collapse, "Disable access collapse");
    sm->add_option("--admission", si.admission,
                   fmt::format("plain or linking (default {})", to_string(config.admission)));
    sm->add_option("--seed", si.seed, "Seed for shuffled placements and cache admission");
    sm->add_option("--train-fraction", si.train_fraction, "Leading share of tokens used for training");
    sm->add_option("--warmup", si.warmup_fraction, "Share of replayed tokens excluded from aggregates");
    sm->add_option("--out-dir", si.out_dir, "Directory for <label>.csv and <label>.json");

    CompareArgs cm;
    auto* c = app.add_subcommand("compare", "Ratio table of run summaries against a baseline");
    c->add_option("summaries", cm.summaries, "Summary JSON files")->required()->expected(2, -1);
    c->add_option("--baseline", cm.baseline, "Baseline label (default: the first summary)");

    CalibrateArgs ca;
    auto* cb = app.add_subcommand("calibrate", "Fit a flash profile to a measured bandwidth curve");
    cb->add_option("--points", ca.points, "CSV of size_bytes,bandwidth_bytes_per_s")->required();
    cb->add_option("--queue-depth", ca.queue_depth, "Device command queue depth");
    cb->add_option("--bundle-bytes", ca.bundle_bytes, "Bundle size recorded in the profile");
    cb->add_option("--name", ca.name, "Profile name");
    cb->add_option("--out", ca.out, "Output profile file (default: stdout)");

    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 2;
    }

    try {
        const Logger log{log_level.empty() ? config.log_level : parse_log_level(log_level), err};
        if (g->parsed()) return cmd_gen_trace(gen, log, out);
        if (s->parsed()) return cmd_stats(st, log, out);
        if (sr->parsed()) return cmd_search(se, config, log, out);
        if (sm->parsed()) return cmd_simulate(si, config, log, out);
        if (c->parsed()) return cmd_compare(cm, out);
        if (cb->parsed()) return cmd_calibrate(ca, log, out);
    } catch (const std::exception& e) {
        err << "ripplekit: error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

}  // namespace ripplekit::cli
