#include "ripplekit/config.hpp"

#include <cstdlib>
#include <fstream>

#include <fmt/format.h>

#include "json_util.hpp"
#include "ripplekit/error.hpp"

namespace ripplekit {

using detail::field_or;
using detail::json;
using detail::reject_unknown_keys;

LogLevel parse_log_level(const std::string& text) {
    if (text == "quiet") return LogLevel::quiet;
    if (text == "info") return LogLevel::info;
    if (text == "debug") return LogLevel::debug;
    throw Error(ErrorKind::config, fmt::format("unknown log level '{}' (quiet, info, debug)", text));
}

namespace {

std::optional<double> optional_double(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) return std::nullopt;
    return detail::field<double>(j, key, where);
}

void parse_harness(const json& j, CliConfig& c) {
    const std::string w = "harness";
    reject_unknown_keys(j, {"profile", "admission", "train_fraction", "warmup_fraction"}, w);
    c.profile = field_or<std::string>(j, "profile", c.profile, w);
    if (j.contains("admission")) {
        c.admission = parse_admission_mode(detail::field<std::string>(j, "admission", w));
    }
    c.train_fraction = field_or(j, "train_fraction", c.train_fraction, w);
    c.warmup_fraction = field_or(j, "warmup_fraction", c.warmup_fraction, w);
}

void parse_cache(const json& j, CliConfig& c) {
    const std::string w = "cache";
    reject_unknown_keys(j,
                        {"ratio", "segment_min_len", "admit_prob_sporadic", "admit_prob_segment",
                         "small_queue_fraction", "ghost_size", "ghost_bypass", "seed"},
                        w);
    c.cache_ratio = field_or(j, "ratio", c.cache_ratio, w);
    CacheConfig& k = c.cache;
    k.segment_min_len = field_or(j, "segment_min_len", k.segment_min_len, w);
    k.admit_prob_sporadic = field_or(j, "admit_prob_sporadic", k.admit_prob_sporadic, w);
    k.admit_prob_segment = field_or(j, "admit_prob_segment", k.admit_prob_segment, w);
    k.small_queue_fraction = field_or(j, "small_queue_fraction", k.small_queue_fraction, w);
    k.ghost_size = field_or(j, "ghost_size", k.ghost_size, w);
    k.ghost_bypass = field_or(j, "ghost_bypass", k.ghost_bypass, w);
    k.seed = field_or(j, "seed", k.seed, w);
    try {
        k.validate();
    } catch (const Error& e) {
        throw Error(ErrorKind::config, fmt::format("cache: {}", e.what()));
    }
}

void parse_collapse(const json& j, CliConfig& c) {
    const std::string w = "collapse";
    reject_unknown_keys(j,
                        {"enabled", "initial_threshold", "min_threshold", "max_threshold",
                         "adjust_factor", "detector_period"},
                        w);
    CollapseSettings& s = c.collapse;
    s.enabled = field_or(j, "enabled", s.enabled, w);
    s.initial_threshold = optional_double(j, "initial_threshold", w);
    s.min_threshold = optional_double(j, "min_threshold", w);
    s.max_threshold = optional_double(j, "max_threshold", w);
    s.adjust_factor = field_or(j, "adjust_factor", s.adjust_factor, w);
    s.detector_period = field_or(j, "detector_period", s.detector_period, w);
}

void parse_generator(const json& j, CliConfig& c) {
    const std::string w = "generator";
    reject_unknown_keys(j,
                        {"neuron_count", "token_count", "sparsity", "cluster_count", "fidelity",
                         "bundle_width"},
                        w);
    c.gen_neuron_count = field_or(j, "neuron_count", c.gen_neuron_count, w);
    c.gen_token_count = field_or(j, "token_count", c.gen_token_count, w);
    c.gen_sparsity = field_or(j, "sparsity", c.gen_sparsity, w);
    c.gen_cluster_count = field_or(j, "cluster_count", c.gen_cluster_count, w);
    c.gen_fidelity = field_or(j, "fidelity", c.gen_fidelity, w);
    c.gen_bundle_width = field_or(j, "bundle_width", c.gen_bundle_width, w);
}

}  // namespace

CliConfig parse_config(std::istream& in, const std::string& source) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw Error(ErrorKind::parse, fmt::format("{}: {}", source, e.what()));
    }
    CliConfig c;
    try {
        reject_unknown_keys(doc,
                            {"log_level", "profiles", "harness", "cache", "collapse", "generator",
                             "search", "paths"},
                            "");
        if (doc.contains("log_level")) {
            c.log_level = parse_log_level(detail::field<std::string>(doc, "log_level", ""));
        }
        if (doc.contains("profiles")) {
            const json& profiles = doc["profiles"];
            if (!profiles.is_object()) throw Error(ErrorKind::config, "profiles: expected an object");
            for (const auto& [name, body] : profiles.items()) {
                HardwareProfile p = detail::profile_from_json(body, "profiles." + name, name);
                p.model_for(2);  // validates
                c.profiles[name] = p;
            }
        }
        if (doc.contains("harness")) parse_harness(doc["harness"], c);
        if (doc.contains("cache")) parse_cache(doc["cache"], c);
        if (doc.contains("collapse")) parse_collapse(doc["collapse"], c);
        if (doc.contains("generator")) parse_generator(doc["generator"], c);
        if (doc.contains("search")) {
            reject_unknown_keys(doc["search"], {"max_neurons"}, "search");
            c.search_max_neurons = field_or(doc["search"], "max_neurons", c.search_max_neurons, "search");
        }
        if (doc.contains("paths")) {
            reject_unknown_keys(doc["paths"], {"out_dir"}, "paths");
            c.out_dir = field_or<std::string>(doc["paths"], "out_dir", c.out_dir.string(), "paths");
        }
    } catch (const Error& e) {
        throw Error(e.kind(), fmt::format("{}: {}", source, e.what()));
    }
    return c;
}

CliConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::io, fmt::format("cannot open config {}", path.string()));
    return parse_config(in, path.string());
}

CliConfig load_config_from(const std::optional<std::filesystem::path>& explicit_path) {
    if (explicit_path) return load_config(*explicit_path);
    if (const char* env = std::getenv("RIPPLEKIT_CONFIG"); env && *env) return load_config(env);
    return CliConfig{};
}

HardwareProfile CliConfig::resolve_profile(const std::string& name_or_path) const {
    if (auto it = profiles.find(name_or_path); it != profiles.end()) return it->second;
    for (const auto& preset : preset_names()) {
        if (preset == name_or_path) return preset_profile(preset);
    }
    if (std::filesystem::exists(name_or_path)) return read_profile(name_or_path);
    throw Error(ErrorKind::config,
                fmt::format("unknown profile '{}' (not configured, not a preset, not a file)",
                            name_or_path));
}

}  // namespace ripplekit
