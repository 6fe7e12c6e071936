#include "ripplekit/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "json_util.hpp"
#include "ripplekit/error.hpp"

namespace ripplekit {

using nlohmann::json;

StrategySpec StrategySpec::parse(const std::string& text, std::uint64_t default_seed) {
    StrategySpec s;
    if (text == "identity") {
        s.kind = Kind::identity;
    } else if (text == "greedy") {
        s.kind = Kind::greedy;
    } else if (text == "shuffled") {
        s.kind = Kind::shuffled;
        s.seed = default_seed;
    } else if (text.rfind("shuffled:", 0) == 0) {
        s.kind = Kind::shuffled;
        const std::string digits = text.substr(9);
        const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), s.seed);
        if (ec != std::errc() || ptr != digits.data() + digits.size() || digits.empty()) {
            throw Error(ErrorKind::config, fmt::format("bad shuffle seed in strategy '{}'", text));
        }
    } else if (text.rfind("file:", 0) == 0 && text.size() > 5) {
        s.kind = Kind::file;
        s.path = text.substr(5);
    } else {
        throw Error(ErrorKind::config,
                    fmt::format("unknown strategy '{}' (identity, greedy, shuffled[:seed], file:<path>)",
                                text));
    }
    return s;
}

std::string StrategySpec::to_string() const {
    switch (kind) {
        case Kind::identity: return "identity";
        case Kind::greedy: return "greedy";
        case Kind::shuffled: return fmt::format("shuffled:{}", seed);
        case Kind::file: return "file:" + path.string();
    }
    return {};
}

AdmissionMode parse_admission_mode(const std::string& text) {
    if (text == "plain") return AdmissionMode::plain;
    if (text == "linking") return AdmissionMode::linking;
    throw Error(ErrorKind::config, fmt::format("unknown admission mode '{}' (plain, linking)", text));
}

std::string to_string(AdmissionMode mode) {
    return mode == AdmissionMode::plain ? "plain" : "linking";
}

CollapseConfig CollapseSettings::resolve(const FlashModel& model) const {
    const double anchor = analytic_threshold(model);
    CollapseConfig c;
    c.initial_threshold = initial_threshold.value_or(anchor);
    c.min_threshold = min_threshold.value_or(0.0);
    c.max_threshold = max_threshold.value_or(std::max(anchor, c.initial_threshold));
    c.adjust_factor = adjust_factor;
    c.detector_period = detector_period;
    c.validate();
    return c;
}

CollapseSettings CollapseSettings::pinned(double threshold) {
    CollapseSettings s;
    s.initial_threshold = threshold;
    s.min_threshold = threshold;
    s.max_threshold = threshold;
    return s;
}

LayerTrace TraceSource::load() const {
    if (file.has_value() == synthetic.has_value()) {
        throw Error(ErrorKind::config, "trace source needs exactly one of a file or a generator spec");
    }
    if (file) {
        if (!std::filesystem::exists(*file)) {
            throw Error(ErrorKind::io, fmt::format("trace file {} does not exist", file->string()));
        }
        return read_trace(*file);
    }
    return generate_clustered_trace(*synthetic);
}

void ExperimentSpec::validate() const {
    if (label.empty() || label.find_first_of("/\\") != std::string::npos) {
        throw Error(ErrorKind::config, fmt::format("bad run label '{}'", label));
    }
    if (!(cache_ratio >= 0.0 && cache_ratio <= 1.0)) {
        throw Error(ErrorKind::config, "cache_ratio must lie in [0, 1]");
    }
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorKind::config, "train_fraction must lie in (0, 1)");
    }
    if (!(warmup_fraction >= 0.0 && warmup_fraction < 1.0)) {
        throw Error(ErrorKind::config, "warmup_fraction must lie in [0, 1)");
    }
    if (strategy.kind == StrategySpec::Kind::file && !std::filesystem::exists(strategy.path)) {
        throw Error(ErrorKind::config,
                    fmt::format("placement file {} does not exist", strategy.path.string()));
    }
    cache.validate();
}

Workload::Workload(LayerTrace trace, double train_fraction)
    : trace_(std::move(trace)), train_fraction_(train_fraction) {
    trace_.validate();
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorKind::config, "train_fraction must lie in (0, 1)");
    }
    split_ = static_cast<std::size_t>(std::floor(train_fraction * trace_.tokens.size()));
    if (split_ == 0 || split_ >= trace_.tokens.size()) {
        throw Error(ErrorKind::invalid_argument,
                    fmt::format("trace of {} tokens is too short to split at {}",
                                trace_.tokens.size(), train_fraction));
    }
    fingerprint_ = ripplekit::fingerprint(trace_);
}

const CoActivationStats& Workload::train_stats() {
    if (!stats_) stats_ = extract_stats(trace_.slice(0, split_));
    return *stats_;
}

const Placement& Workload::greedy_placement() {
    if (!greedy_) greedy_ = greedy_search(train_stats());
    return *greedy_;
}

Placement Workload::resolve_placement(const StrategySpec& strategy) {
    switch (strategy.kind) {
        case StrategySpec::Kind::identity: return Placement::identity(trace_.neuron_count);
        case StrategySpec::Kind::shuffled: return Placement::shuffled(trace_.neuron_count, strategy.seed);
        case StrategySpec::Kind::greedy: return greedy_placement();
        case StrategySpec::Kind::file: {
            if (!std::filesystem::exists(strategy.path)) {
                throw Error(ErrorKind::config,
                            fmt::format("placement file {} does not exist", strategy.path.string()));
            }
            PlacementFile f = read_placement(strategy.path);
            if (f.placement.size() != trace_.neuron_count) {
                throw Error(ErrorKind::dimension_mismatch,
                            fmt::format("placement {} covers {} neurons, trace has {}",
                                        strategy.path.string(), f.placement.size(),
                                        trace_.neuron_count));
            }
            return f.placement;
        }
    }
    throw Error(ErrorKind::config, "unknown strategy");
}

namespace {

template <typename F>
auto staged(std::uint64_t token, const char* stage, F&& body) {
    try {
        return body();
    } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("token {}, stage {}: {}", token, stage, e.what()));
    } catch (const std::exception& e) {
        throw Error(ErrorKind::invalid_argument,
                    fmt::format("token {}, stage {}: {}", token, stage, e.what()));
    }
}

double safe_div(double num, double den) { return den > 0.0 ? num / den : 0.0; }

}  // namespace

RunReport run_experiment(Workload& workload, const ExperimentSpec& spec) {
    spec.validate();
    if (spec.train_fraction != workload.train_fraction()) {
        throw Error(ErrorKind::config,
                    fmt::format("run '{}' splits at {} but the workload splits at {}", spec.label,
                                spec.train_fraction, workload.train_fraction()));
    }
    const LayerTrace& trace = workload.trace();

    RunReport report;
    report.spec = spec;
    report.model = spec.profile.model_for(trace.bundle_width);
    const FlashModel& model = report.model;
    const Placement placement = workload.resolve_placement(spec.strategy);
    report.placement = spec.strategy.to_string();

    CacheConfig cache_config = spec.cache;
    cache_config.capacity_neurons =
        static_cast<std::uint32_t>(std::lround(spec.cache_ratio * trace.neuron_count));
    LinkingCache cache(trace.neuron_count, cache_config);
    const bool caching = cache_config.capacity_neurons > 0;
    CacheView view;
    if (caching) view = [&cache](NeuronId id) { return cache.contains(id); };

    const CollapseConfig collapse_config = spec.collapse.resolve(model);
    PlannerState state = initial_planner_state(collapse_config);

    const std::size_t begin = workload.split();
    const std::size_t replay = trace.tokens.size() - begin;
    const auto warmup = static_cast<std::size_t>(std::floor(spec.warmup_fraction * replay));
    report.records.reserve(replay);

    std::vector<Position> positions;
    for (std::size_t k = 0; k < replay; ++k) {
        const std::uint64_t index = begin + k;
        const TokenActivation& token = trace.tokens[index];
        TokenRecord rec;
        rec.token = index;
        rec.warmup = k < warmup;
        rec.activated = token.size();

        staged(index, "lookup", [&] {
            if (!caching) return;
            for (NeuronId id : token) rec.cache_hits += cache.lookup_and_touch(id) ? 1 : 0;
        });

        const ReadPlan plan = staged(index, "plan", [&] {
            if (!spec.collapse.enabled) {
                ReadPlan p = build_extents(token, placement, view);
                rec.runs = p.extents.size();
                rec.iops_bound = is_iops_bound(p, model);
                return p;
            }
            TokenPlan tp = plan_token(token, placement, view, state, model, collapse_config);
            state = tp.state;
            rec.runs = tp.uncollapsed.extents.size();
            rec.threshold = state.current_threshold;
            rec.iops_bound = state.last_bound_state;
            return std::move(tp.plan);
        });

        const IoReport io = staged(index, "simulate", [&] {
            plan.validate();
            return simulate(plan, model);
        });
        rec.demanded = plan.activated_neurons;
        rec.io_ops = io.io_ops;
        rec.bundles_read = plan.total_length();
        for (const Extent& e : plan.extents) {
            rec.max_extent_len = std::max<std::uint64_t>(rec.max_extent_len, e.length);
        }
        rec.bytes_read = io.bytes_read;
        rec.speculative_bytes = (rec.bundles_read - rec.demanded) * model.bundle_bytes;
        rec.latency = io.latency;
        rec.effective_bandwidth = io.effective_bandwidth;

        staged(index, "admit", [&] {
            if (!caching) return;
            if (spec.admission == AdmissionMode::plain) {
                for (NeuronId id : token) {
                    if (!cache.contains(id)) cache.admit(id, AdmissionClass::sporadic);
                }
                return;
            }
            positions.clear();
            for (NeuronId id : token) positions.push_back(placement.position_of(id));
            const ActivationRuns runs =
                classify_runs(positions, placement, cache_config.segment_min_len);
            for (NeuronId id : runs.sporadic) cache.admit(id, AdmissionClass::sporadic);
            for (const auto& seg : runs.segments) cache.admit(seg, AdmissionClass::segment);
        });

        report.records.push_back(rec);
    }

    report.cache = cache.stats();
    report.summary.label = spec.label;
    report.summary.trace_fingerprint = workload.fingerprint();
    report.summary.aggregates = aggregate(report.records);
    return report;
}

RunAggregates aggregate(std::span<const TokenRecord> records) {
    RunAggregates a;
    double latency = 0.0;
    std::uint64_t ops = 0, bundles = 0, hits = 0, activated = 0, speculative = 0;
    for (const TokenRecord& r : records) {
        if (r.warmup) continue;
        ++a.tokens;
        latency += r.latency;
        ops += r.io_ops;
        bundles += r.bundles_read;
        hits += r.cache_hits;
        activated += r.activated;
        speculative += r.speculative_bytes;
        a.bytes_read += r.bytes_read;
        a.max_extent_len = std::max(a.max_extent_len, r.max_extent_len);
    }
    const auto n = static_cast<double>(a.tokens);
    a.mean_latency = safe_div(latency, n);
    a.mean_io_ops = safe_div(static_cast<double>(ops), n);
    a.iops = safe_div(static_cast<double>(ops), latency);
    a.effective_bandwidth = safe_div(static_cast<double>(a.bytes_read - speculative), latency);
    a.mean_extent_len = safe_div(static_cast<double>(bundles), static_cast<double>(ops));
    a.hit_rate = safe_div(static_cast<double>(hits), static_cast<double>(activated));
    a.speculative_fraction = safe_div(static_cast<double>(speculative), static_cast<double>(a.bytes_read));
    return a;
}

std::vector<ExperimentSpec> ablation_arms(const ExperimentSpec& base, std::uint64_t shuffle_seed) {
    struct Arm {
        const char* label;
        bool greedy;
        bool online;
    };
    static constexpr Arm arms[] = {
        {"baseline", false, false}, {"offline", true, false}, {"online", false, true}, {"full", true, true}};
    std::vector<ExperimentSpec> specs;
    for (const Arm& arm : arms) {
        ExperimentSpec s = base;
        s.label = arm.label;
        s.strategy = StrategySpec{};
        if (arm.greedy) {
            s.strategy.kind = StrategySpec::Kind::greedy;
        } else {
            s.strategy.kind = StrategySpec::Kind::shuffled;
            s.strategy.seed = shuffle_seed;
        }
        s.admission = arm.online ? AdmissionMode::linking : AdmissionMode::plain;
        s.collapse.enabled = arm.online;
        specs.push_back(std::move(s));
    }
    return specs;
}

std::vector<RunReport> run_ablation(Workload& workload, const ExperimentSpec& base,
                                    std::uint64_t shuffle_seed) {
    std::vector<RunReport> reports;
    for (const auto& spec : ablation_arms(base, shuffle_seed)) {
        reports.push_back(run_experiment(workload, spec));
    }
    return reports;
}

namespace {

const std::vector<std::string>& comparison_metrics() {
    static const std::vector<std::string> names = {
        "speedup",         "mean_latency",  "mean_io_ops", "iops", "effective_bandwidth",
        "mean_extent_len", "max_extent_len", "hit_rate", "speculative_fraction", "bytes_read"};
    return names;
}

std::vector<double> metric_values(const RunAggregates& a) {
    return {a.mean_latency, a.mean_latency, a.mean_io_ops, a.iops, a.effective_bandwidth,
            a.mean_extent_len, static_cast<double>(a.max_extent_len), a.hit_rate,
            a.speculative_fraction, static_cast<double>(a.bytes_read)};
}

double ratio_of(double num, double den) {
    if (den == 0.0) return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return num / den;
}

}  // namespace

ComparisonTable compare(std::span<const RunSummary> runs, const std::string& baseline) {
    if (runs.size() < 2) throw Error(ErrorKind::invalid_argument, "compare needs at least two reports");
    const auto base = std::find_if(runs.begin(), runs.end(),
                                   [&](const RunSummary& r) { return r.label == baseline; });
    if (base == runs.end()) {
        throw Error(ErrorKind::invalid_argument, fmt::format("no report labelled '{}'", baseline));
    }
    for (const RunSummary& r : runs) {
        if (r.trace_fingerprint != base->trace_fingerprint) {
            throw Error(ErrorKind::dimension_mismatch,
                        fmt::format("report '{}' replays trace {:016x}, baseline '{}' replays {:016x}",
                                    r.label, r.trace_fingerprint, base->label,
                                    base->trace_fingerprint));
        }
    }
    ComparisonTable table;
    table.baseline = baseline;
    table.metrics = comparison_metrics();
    const std::vector<double> b = metric_values(base->aggregates);
    for (const RunSummary& r : runs) {
        const std::vector<double> v = metric_values(r.aggregates);
        ComparisonRow row{r.label, {}};
        row.ratios.push_back(ratio_of(b[0], v[0]));
        for (std::size_t m = 1; m < v.size(); ++m) row.ratios.push_back(ratio_of(v[m], b[m]));
        table.rows.push_back(std::move(row));
    }
    return table;
}

double ComparisonTable::ratio(const std::string& label, const std::string& metric) const {
    const auto m = std::find(metrics.begin(), metrics.end(), metric);
    if (m == metrics.end()) throw Error(ErrorKind::invalid_argument, fmt::format("unknown metric '{}'", metric));
    for (const auto& row : rows) {
        if (row.label == label) return row.ratios.at(static_cast<std::size_t>(m - metrics.begin()));
    }
    throw Error(ErrorKind::invalid_argument, fmt::format("no row labelled '{}'", label));
}

std::string format_table(const ComparisonTable& table) {
    std::size_t width = 8;
    for (const auto& row : table.rows) width = std::max(width, row.label.size() + 2);
    std::string out = fmt::format("{:<{}}", "arm", width);
    for (const auto& m : table.metrics) out += fmt::format(" {:>20}", m);
    out += '\n';
    for (const auto& row : table.rows) {
        out += fmt::format("{:<{}}", row.label, width);
        for (double r : row.ratios) out += fmt::format(" {:>20.4f}", r);
        out += '\n';
    }
    out += fmt::format("(ratios against '{}')\n", table.baseline);
    return out;
}

namespace {

constexpr const char* kCsvHeader =
    "token,warmup,activated,cache_hits,demanded,runs,io_ops,bundles_read,max_extent_len,"
    "bytes_read,speculative_bytes,latency_s,effective_bandwidth,threshold,iops_bound";

template <typename T>
T parse_number(const std::string& text, std::size_t line) {
    T value{};
    if constexpr (std::is_floating_point_v<T>) {
        std::istringstream in(text);
        in.imbue(std::locale::classic());
        if (in >> value && in.peek() == std::char_traits<char>::eof()) return value;
    } else {
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
        if (ec == std::errc() && ptr == text.data() + text.size()) return value;
    }
    throw Error(ErrorKind::parse, fmt::format("records line {}: bad number '{}'", line, text));
}

}  // namespace

void write_records_csv(std::span<const TokenRecord> records, std::ostream& out) {
    out << kCsvHeader << '\n';
    for (const TokenRecord& r : records) {
        out << fmt::format("{},{:d},{},{},{},{},{},{},{},{},{},{},{},{},{:d}\n", r.token, r.warmup,
                           r.activated, r.cache_hits, r.demanded, r.runs, r.io_ops, r.bundles_read,
                           r.max_extent_len, r.bytes_read, r.speculative_bytes, r.latency,
                           r.effective_bandwidth, r.threshold, r.iops_bound);
    }
    if (!out) throw Error(ErrorKind::io, "failed writing records");
}

std::vector<TokenRecord> read_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCsvHeader) {
        throw Error(ErrorKind::parse, "records: missing or unexpected header");
    }
    std::vector<TokenRecord> records;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const std::size_t comma = line.find(',', start);
            f.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        if (f.size() != 15) {
            throw Error(ErrorKind::parse, fmt::format("records line {}: expected 15 fields, got {}",
                                                      line_no, f.size()));
        }
        TokenRecord r;
        auto u = [&](std::size_t k) { return parse_number<std::uint64_t>(f[k], line_no); };
        auto d = [&](std::size_t k) { return parse_number<double>(f[k], line_no); };
        r.token = u(0);
        r.warmup = u(1) != 0;
        r.activated = u(2);
        r.cache_hits = u(3);
        r.demanded = u(4);
        r.runs = u(5);
        r.io_ops = u(6);
        r.bundles_read = u(7);
        r.max_extent_len = u(8);
        r.bytes_read = u(9);
        r.speculative_bytes = u(10);
        r.latency = d(11);
        r.effective_bandwidth = d(12);
        r.threshold = d(13);
        r.iops_bound = u(14) != 0;
        records.push_back(r);
    }
    return records;
}

namespace {

json aggregates_to_json(const RunAggregates& a) {
    return {{"tokens", a.tokens},
            {"mean_latency", a.mean_latency},
            {"mean_io_ops", a.mean_io_ops},
            {"iops", a.iops},
            {"effective_bandwidth", a.effective_bandwidth},
            {"mean_extent_len", a.mean_extent_len},
            {"max_extent_len", a.max_extent_len},
            {"hit_rate", a.hit_rate},
            {"speculative_fraction", a.speculative_fraction},
            {"bytes_read", a.bytes_read}};
}

RunAggregates aggregates_from_json(const json& j) {
    const std::string where = "aggregates";
    detail::reject_unknown_keys(j,
                                {"tokens", "mean_latency", "mean_io_ops", "iops",
                                 "effective_bandwidth", "mean_extent_len", "max_extent_len",
                                 "hit_rate", "speculative_fraction", "bytes_read"},
                                where);
    RunAggregates a;
    a.tokens = detail::field<std::uint64_t>(j, "tokens", where);
    a.mean_latency = detail::field<double>(j, "mean_latency", where);
    a.mean_io_ops = detail::field<double>(j, "mean_io_ops", where);
    a.iops = detail::field<double>(j, "iops", where);
    a.effective_bandwidth = detail::field<double>(j, "effective_bandwidth", where);
    a.mean_extent_len = detail::field<double>(j, "mean_extent_len", where);
    a.max_extent_len = detail::field<std::uint64_t>(j, "max_extent_len", where);
    a.hit_rate = detail::field<double>(j, "hit_rate", where);
    a.speculative_fraction = detail::field<double>(j, "speculative_fraction", where);
    a.bytes_read = detail::field<std::uint64_t>(j, "bytes_read", where);
    return a;
}

}  // namespace

void write_summary(const RunReport& report, std::ostream& out) {
    const ExperimentSpec& s = report.spec;
    const CollapseConfig c = s.collapse.resolve(report.model);
    json doc;
    doc["label"] = report.summary.label;
    doc["trace_fingerprint"] = report.summary.trace_fingerprint;
    doc["aggregates"] = aggregates_to_json(report.summary.aggregates);
    doc["model"] = {{"op_latency", report.model.op_latency},
                    {"max_bandwidth", report.model.max_bandwidth},
                    {"queue_depth", report.model.queue_depth},
                    {"bundle_bytes", report.model.bundle_bytes},
                    {"iops_knee_bytes", report.model.iops_knee_bytes}};
    doc["config"] = {
        {"placement", report.placement},
        {"profile", detail::profile_to_json(s.profile)},
        {"cache_ratio", s.cache_ratio},
        {"cache",
         {{"segment_min_len", s.cache.segment_min_len},
          {"admit_prob_sporadic", s.cache.admit_prob_sporadic},
          {"admit_prob_segment", s.cache.admit_prob_segment},
          {"small_queue_fraction", s.cache.small_queue_fraction},
          {"ghost_size", s.cache.ghost_size},
          {"ghost_bypass", s.cache.ghost_bypass},
          {"seed", s.cache.seed}}},
        {"admission", to_string(s.admission)},
        {"collapse",
         {{"enabled", s.collapse.enabled},
          {"initial_threshold", c.initial_threshold},
          {"min_threshold", c.min_threshold},
          {"max_threshold", c.max_threshold},
          {"adjust_factor", c.adjust_factor},
          {"detector_period", c.detector_period}}},
        {"train_fraction", s.train_fraction},
        {"warmup_fraction", s.warmup_fraction},
        {"replay_tokens", report.records.size()}};
    const CacheStats& cs = report.cache;
    doc["cache_stats"] = {{"hits", cs.hits},
                          {"misses", cs.misses},
                          {"admitted_sporadic", cs.admitted_sporadic},
                          {"admitted_segment", cs.admitted_segment},
                          {"rejected_sporadic", cs.rejected_sporadic},
                          {"rejected_segment", cs.rejected_segment},
                          {"ghost_promotions", cs.ghost_promotions},
                          {"evictions", cs.evictions},
                          {"promoted_to_main", cs.promoted_to_main},
                          {"main_reinsertions", cs.main_reinsertions},
                          {"oversize_skipped", cs.oversize_skipped}};
    out << doc.dump(2) << '\n';
    if (!out) throw Error(ErrorKind::io, "failed writing summary");
}

RunSummary read_summary(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, fmt::format("summary: {}", e.what()));
    }
    detail::reject_unknown_keys(doc, {"label", "trace_fingerprint", "aggregates", "model", "config",
                                      "cache_stats"},
                                "");
    RunSummary s;
    s.label = detail::field<std::string>(doc, "label", "summary");
    s.trace_fingerprint = detail::field<std::uint64_t>(doc, "trace_fingerprint", "summary");
    if (!doc.contains("aggregates")) throw Error(ErrorKind::parse, "summary: aggregates missing");
    s.aggregates = aggregates_from_json(doc["aggregates"]);
    return s;
}

RunSummary read_summary(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, fmt::format("cannot open {}", path.string()));
    try {
        return read_summary(in);
    } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
    }
}

std::pair<std::filesystem::path, std::filesystem::path> write_report(
    const RunReport& report, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorKind::io, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
    const auto csv = dir / (report.summary.label + ".csv");
    const auto summary = dir / (report.summary.label + ".json");
    {
        std::ofstream out(csv, std::ios::binary);
        if (!out) throw Error(ErrorKind::io, fmt::format("cannot write {}", csv.string()));
        write_records_csv(report.records, out);
    }
    {
        std::ofstream out(summary, std::ios::binary);
        if (!out) throw Error(ErrorKind::io, fmt::format("cannot write {}", summary.string()));
        write_summary(report, out);
    }
    return {csv, summary};
}

}  // namespace ripplekit
