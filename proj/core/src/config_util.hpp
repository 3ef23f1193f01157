// Flat dotted-key configuration helpers shared by the run and experiment
// configurations.  Private to the core library.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "maxent/errors.hpp"
#include "maxent/geometry.hpp"

namespace maxent::detail {

using json = nlohmann::ordered_json;

/// {"a": {"b": 1}} -> {"a.b": 1}.  Arrays are leaves.
inline void flatten_into(const json& node, const std::string& prefix, json& out) {
  if (node.is_object() && (prefix.empty() || !node.empty())) {
    for (const auto& [k, v] : node.items()) flatten_into(v, prefix.empty() ? k : prefix + "." + k, out);
  } else {
    out[prefix] = node;
  }
}

inline json flatten(const json& nested) {
  json out = json::object();
  flatten_into(nested, "", out);
  return out;
}

inline json unflatten(const json& flat) {
  json out = json::object();
  for (const auto& [key, value] : flat.items()) {
    json* node = &out;
    std::size_t start = 0;
    for (std::size_t dot = key.find('.'); dot != std::string::npos; dot = key.find('.', start)) {
      node = &(*node)[key.substr(start, dot - start)];
      start = dot + 1;
    }
    (*node)[key.substr(start)] = value;
  }
  return out;
}

inline bool same_kind(const json& want, const json& got) {
  if (want.is_boolean()) return got.is_boolean();
  if (want.is_number_integer() || want.is_number_unsigned()) {
    return got.is_number_integer() || got.is_number_unsigned();
  }
  if (want.is_number()) return got.is_number();
  if (want.is_string()) return got.is_string();
  if (want.is_array()) return got.is_array();
  return want.type() == got.type();
}

/// Overwrites known keys of `base` (flat) with `incoming` (flat).
inline void merge_checked(json& base, const json& incoming, const std::string& source) {
  for (const auto& [key, value] : incoming.items()) {
    if (!base.contains(key)) throw ConfigError(source + ": unknown configuration key '" + key + "'");
    if (!same_kind(base[key], value)) {
      throw ConfigError(source + ": key '" + key + "' expects a " + base[key].type_name() +
                        ", got " + value.type_name());
    }
    base[key] = value;
  }
}

/// "key=value"; the value is parsed as JSON when possible, else kept as a string.
inline std::pair<std::string, json> parse_override(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + text + "' is not of the form key=value");
  }
  const std::string key = text.substr(0, eq);
  const std::string raw = text.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  return {key, value};
}

inline json bounds_to_json(const std::vector<Interval>& bounds) {
  json arr = json::array();
  for (const auto& b : bounds) arr.push_back({b.low, b.high});
  return arr;
}

inline std::vector<Interval> bounds_from_json(const json& arr) {
  std::vector<Interval> out;
  for (const auto& b : arr) {
    if (!b.is_array() || b.size() != 2 || !b[0].is_number() || !b[1].is_number()) {
      throw ConfigError("bounds must be a list of [low, high] pairs");
    }
    out.push_back({b[0].get<double>(), b[1].get<double>()});
  }
  return out;
}

}  // namespace maxent::detail
