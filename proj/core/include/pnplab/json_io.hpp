#pragma once

#include <set>
#include <string>
#include <utility>

#include "json.hpp"

#include "pnplab/datasets.hpp"
#include "pnplab/errors.hpp"
#include "pnplab/flow_matching.hpp"
#include "pnplab/vector_field_net.hpp"

namespace pnp {

using Json = nlohmann::json;

/**
 * Strict reader over one JSON object.
 *
 * Every accessed key is remembered; finish() rejects the rest. Errors carry
 * the dotted key path, e.g. "sample.plan[1].k".
 */
class JsonObjectReader {
public:
    JsonObjectReader(const Json& object, std::string path);

    bool has(const std::string& key) const { return object_.contains(key); }
    const Json& raw(const std::string& key);
    JsonObjectReader child(const std::string& key);
    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    const std::string& path() const { return path_; }

    template <typename T>
    T get(const std::string& key) {
        const Json& v = raw(key);
        try {
            return v.get<T>();
        } catch (const nlohmann::json::exception&) {
            throw ConfigError(key_path(key) + ": wrong type");
        }
    }

    template <typename T>
    T get_or(const std::string& key, T fallback) {
        return has(key) ? get<T>(key) : std::move(fallback);
    }

    /// Throws ConfigError naming the first key that was never read.
    void finish() const;

private:
    const Json& object_;
    std::string path_;
    std::set<std::string> seen_;
};

Json to_json(const DatasetSpec& spec);
DatasetSpec dataset_spec_from_json(const Json& j, const std::string& path = "dataset");

Json to_json(const NetArchitecture& arch);
NetArchitecture architecture_from_json(const Json& j, const std::string& path = "model");

Json to_json(const TrainConfig& config);
TrainConfig train_config_from_json(const Json& j, const std::string& path = "train");

/// 64-bit FNV-1a of `text`, as 16 lowercase hex digits.
std::string fingerprint_of(const std::string& text);
inline std::string fingerprint_of(const Json& j) { return fingerprint_of(j.dump()); }

}  // namespace pnp
