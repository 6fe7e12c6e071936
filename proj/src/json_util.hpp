#pragma once

// Strict JSON field access shared by the file readers.

#include <initializer_list>
#include <string>
#include <string_view>

#include <fmt/format.h>
#include <json.hpp>

#include "ripplekit/error.hpp"
#include "ripplekit/flashsim.hpp"

namespace ripplekit::detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& object, std::initializer_list<std::string_view> known,
                                const std::string& where) {
    if (!object.is_object()) {
        throw Error(ErrorKind::config, fmt::format("{}: expected an object", where));
    }
    for (const auto& [key, _] : object.items()) {
        bool ok = false;
        for (auto k : known) ok = ok || key == k;
        if (!ok) {
            throw Error(ErrorKind::config,
                        fmt::format("unknown key '{}{}{}'", where, where.empty() ? "" : ".", key));
        }
    }
}

template <typename T>
T field(const json& object, const char* key, const std::string& where) {
    try {
        return object.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorKind::config,
                    fmt::format("key '{}.{}' missing or of the wrong type", where, key));
    }
}

template <typename T>
T field_or(const json& object, const char* key, T fallback, const std::string& where) {
    if (!object.contains(key)) return fallback;
    return field<T>(object, key, where);
}

inline HardwareProfile profile_from_json(const json& doc, const std::string& where,
                                         const std::string& default_name = {}) {
    reject_unknown_keys(doc,
                        {"name", "op_latency", "max_bandwidth", "queue_depth", "neuron_dim",
                         "precision_bytes", "bundle_bytes", "iops_knee_bytes"},
                        where);
    HardwareProfile p;
    p.name = field_or<std::string>(doc, "name", default_name, where);
    p.max_bandwidth = field<double>(doc, "max_bandwidth", where);
    p.queue_depth = field_or<std::uint32_t>(doc, "queue_depth", kUfsQueueDepth, where);
    p.neuron_dim = field_or<std::uint32_t>(doc, "neuron_dim", p.neuron_dim, where);
    p.precision_bytes = field_or<std::uint32_t>(doc, "precision_bytes", p.precision_bytes, where);
    if (doc.contains("bundle_bytes")) p.bundle_bytes = field<std::uint64_t>(doc, "bundle_bytes", where);
    if (doc.contains("op_latency")) {
        p.op_latency = field<double>(doc, "op_latency", where);
    } else if (doc.contains("iops_knee_bytes")) {
        // Knee given instead of the command latency: derive it.
        p.op_latency = field<double>(doc, "iops_knee_bytes", where) / p.max_bandwidth * p.queue_depth;
    } else {
        throw Error(ErrorKind::config,
                    fmt::format("{}: one of op_latency or iops_knee_bytes is required", where));
    }
    if (p.name.empty()) throw Error(ErrorKind::config, fmt::format("{}: profile name missing", where));
    return p;
}

inline json profile_to_json(const HardwareProfile& p) {
    json doc = {{"name", p.name},
                {"op_latency", p.op_latency},
                {"max_bandwidth", p.max_bandwidth},
                {"queue_depth", p.queue_depth},
                {"neuron_dim", p.neuron_dim},
                {"precision_bytes", p.precision_bytes}};
    if (p.bundle_bytes) doc["bundle_bytes"] = *p.bundle_bytes;
    return doc;
}

}  // namespace ripplekit::detail
