#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "ripplekit/cache.hpp"
#include "ripplekit/flashsim.hpp"
#include "ripplekit/harness.hpp"

namespace ripplekit {

enum class LogLevel { quiet, info, debug };

/// Shared defaults for the command-line tool. Every section is optional and
/// unknown keys anywhere are rejected with Error{config} naming the key.
///
///   {"log_level": "info",
///    "profiles": {"<name>": {<profile>}, ...},
///    "harness": {"profile", "admission", "train_fraction", "warmup_fraction"},
///    "cache": {"ratio", "segment_min_len", "admit_prob_sporadic", "admit_prob_segment",
///              "small_queue_fraction", "ghost_size", "ghost_bypass", "seed"},
///    "collapse": {"enabled", "initial_threshold", "min_threshold", "max_threshold",
///                 "adjust_factor", "detector_period"},
///    "generator": {"neuron_count", "token_count", "sparsity", "cluster_count",
///                  "fidelity", "bundle_width"},
///    "search": {"max_neurons"},
///    "paths": {"out_dir"}}
struct CliConfig {
    LogLevel log_level = LogLevel::info;
    std::map<std::string, HardwareProfile> profiles;

    std::string profile = "ufs40";
    AdmissionMode admission = AdmissionMode::linking;
    double train_fraction = 0.5;
    double warmup_fraction = 0.1;

    double cache_ratio = 0.1;
    CacheConfig cache;
    CollapseSettings collapse;

    std::uint32_t gen_neuron_count = 1024;
    std::uint32_t gen_token_count = 200;
    double gen_sparsity = 0.1;
    std::uint32_t gen_cluster_count = 8;
    double gen_fidelity = 0.9;
    std::uint32_t gen_bundle_width = 2;

    std::uint32_t search_max_neurons = 16384;
    std::filesystem::path out_dir = "ripplekit-out";

    /// A profile from the config, a preset name, or a profile JSON file path.
    HardwareProfile resolve_profile(const std::string& name_or_path) const;
};

CliConfig parse_config(std::istream& in, const std::string& source = "config");
CliConfig load_config(const std::filesystem::path& path);

/// `explicit_path` if given, else $RIPPLEKIT_CONFIG if set, else built-in defaults.
CliConfig load_config_from(const std::optional<std::filesystem::path>& explicit_path);

LogLevel parse_log_level(const std::string& text);

}  // namespace ripplekit
