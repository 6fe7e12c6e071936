#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ripplekit/access.hpp"
#include "ripplekit/cache.hpp"
#include "ripplekit/flashsim.hpp"
#include "ripplekit/placement.hpp"
#include "ripplekit/stats.hpp"
#include "ripplekit/trace.hpp"

namespace ripplekit {

struct StrategySpec {
    enum class Kind { identity, shuffled, greedy, file };
    Kind kind = Kind::greedy;
    std::uint64_t seed = 0;      // shuffled
    std::filesystem::path path;  // file

    /// "identity", "greedy", "shuffled", "shuffled:<seed>" or "file:<path>".
    /// Bare "shuffled" takes `default_seed`. Throws Error{config}.
    static StrategySpec parse(const std::string& text, std::uint64_t default_seed = 0);
    std::string to_string() const;
};

enum class AdmissionMode {
    plain,   // every miss is a sporadic admission unit
    linking  // misses are grouped into position runs and admitted per class
};

AdmissionMode parse_admission_mode(const std::string& text);
std::string to_string(AdmissionMode mode);

/// Collapse settings before they are anchored to a device. Unset thresholds
/// default to CollapseConfig::anchored for that device.
struct CollapseSettings {
    bool enabled = true;
    std::optional<double> initial_threshold;
    std::optional<double> min_threshold;
    std::optional<double> max_threshold;
    double adjust_factor = 2.0;
    std::uint32_t detector_period = 16;

    CollapseConfig resolve(const FlashModel& model) const;
    /// min = initial = max = threshold.
    static CollapseSettings pinned(double threshold);
};

struct TraceSource {
    std::optional<std::filesystem::path> file;
    std::optional<SyntheticTraceSpec> synthetic;

    LayerTrace load() const;
};

struct ExperimentSpec {
    std::string label = "run";
    StrategySpec strategy;
    HardwareProfile profile;
    /// capacity_neurons is replaced by round(cache_ratio x N).
    double cache_ratio = 0.1;
    CacheConfig cache;
    AdmissionMode admission = AdmissionMode::linking;
    CollapseSettings collapse;
    /// Stats and placement come from the first train_fraction of the trace,
    /// the rest is replayed.
    double train_fraction = 0.5;
    /// Leading share of replayed tokens left out of the aggregates.
    double warmup_fraction = 0.1;

    void validate() const;
};

/// A trace plus lazily computed training statistics and greedy placement,
/// shared by the arms replayed over it. Not thread-safe.
class Workload {
public:
    explicit Workload(LayerTrace trace, double train_fraction = 0.5);

    const LayerTrace& trace() const noexcept { return trace_; }
    double train_fraction() const noexcept { return train_fraction_; }
    std::size_t split() const noexcept { return split_; }
    std::uint64_t fingerprint() const noexcept { return fingerprint_; }

    const CoActivationStats& train_stats();
    const Placement& greedy_placement();

    /// Throws Error{config} if the strategy file is unreadable and
    /// Error{dimension_mismatch} if it covers a different neuron count.
    Placement resolve_placement(const StrategySpec& strategy);

private:
    LayerTrace trace_;
    double train_fraction_;
    std::size_t split_;
    std::uint64_t fingerprint_;
    std::optional<CoActivationStats> stats_;
    std::optional<Placement> greedy_;
};

/// One replayed token. Counts are in bundles unless named *_bytes.
struct TokenRecord {
    std::uint64_t token = 0;          // index in the full trace
    bool warmup = false;
    std::uint64_t activated = 0;
    std::uint64_t cache_hits = 0;
    std::uint64_t demanded = 0;       // activated and not cached
    std::uint64_t runs = 0;           // contiguous runs before collapse
    std::uint64_t io_ops = 0;
    std::uint64_t bundles_read = 0;
    std::uint64_t max_extent_len = 0;
    std::uint64_t bytes_read = 0;
    std::uint64_t speculative_bytes = 0;
    double latency = 0.0;
    double effective_bandwidth = 0.0;
    double threshold = 0.0;           // collapse threshold in force
    bool iops_bound = false;          // last detector verdict

    bool operator==(const TokenRecord&) const = default;
};

/// Aggregates over non-warmup tokens. Rates are ratios of sums.
struct RunAggregates {
    std::uint64_t tokens = 0;
    double mean_latency = 0.0;           // seconds per token
    double mean_io_ops = 0.0;            // commands per token
    double iops = 0.0;                   // commands per second of I/O
    double effective_bandwidth = 0.0;    // demanded bytes per second of I/O
    double mean_extent_len = 0.0;        // bundles per command
    std::uint64_t max_extent_len = 0;
    double hit_rate = 0.0;
    double speculative_fraction = 0.0;   // speculative bytes / bytes read
    std::uint64_t bytes_read = 0;

    bool operator==(const RunAggregates&) const = default;
};

RunAggregates aggregate(std::span<const TokenRecord> records);

struct RunSummary {
    std::string label;
    std::uint64_t trace_fingerprint = 0;
    RunAggregates aggregates;
};

struct RunReport {
    ExperimentSpec spec;
    FlashModel model;
    std::string placement;  // resolved strategy
    RunSummary summary;
    std::vector<TokenRecord> records;
    CacheStats cache;
};

/// Replays the held-out tokens: cache lookup, read planning, simulation,
/// then admission of the demanded neurons. Speculative gap reads are not
/// admitted. Deterministic given the seeds in `spec`. Component errors are
/// rethrown with the token index and stage.
RunReport run_experiment(Workload& workload, const ExperimentSpec& spec);

/// The four arms of the offline / online ablation over one workload:
///   baseline  shuffled, plain cache, no collapse
///   offline   greedy, plain cache, no collapse
///   online    shuffled, linking cache, collapse
///   full      greedy, linking cache, collapse
/// `base` supplies the profile, cache and collapse parameters; the shuffled
/// arms use `shuffle_seed`.
std::vector<ExperimentSpec> ablation_arms(const ExperimentSpec& base, std::uint64_t shuffle_seed);
std::vector<RunReport> run_ablation(Workload& workload, const ExperimentSpec& base,
                                    std::uint64_t shuffle_seed);

struct ComparisonRow {
    std::string label;
    std::vector<double> ratios;  // arm / baseline, per ComparisonTable::metrics
};

struct ComparisonTable {
    std::string baseline;
    std::vector<std::string> metrics;
    std::vector<ComparisonRow> rows;  // input order, baseline included

    double ratio(const std::string& label, const std::string& metric) const;
};

/// Per-metric ratios against `baseline` (speedup is baseline latency over
/// arm latency). Throws Error{invalid_argument} for fewer than two reports
/// or an unknown baseline, Error{dimension_mismatch} when the trace
/// fingerprints differ.
ComparisonTable compare(std::span<const RunSummary> runs, const std::string& baseline);
std::string format_table(const ComparisonTable& table);

// Per-token CSV. Columns, in order:
//   token, warmup, activated, cache_hits, demanded, runs, io_ops,
//   bundles_read, max_extent_len, bytes_read, speculative_bytes,
//   latency_s, effective_bandwidth, threshold, iops_bound
// Floats use the shortest round-trip form, so identical runs give identical bytes.
void write_records_csv(std::span<const TokenRecord> records, std::ostream& out);
std::vector<TokenRecord> read_records_csv(std::istream& in);

// Summary JSON: label, trace_fingerprint, aggregates, model and config echo.
void write_summary(const RunReport& report, std::ostream& out);
RunSummary read_summary(std::istream& in);
RunSummary read_summary(const std::filesystem::path& path);

/// Writes <label>.csv and <label>.json into `dir`; returns the two paths.
std::pair<std::filesystem::path, std::filesystem::path> write_report(
    const RunReport& report, const std::filesystem::path& dir);

}  // namespace ripplekit
