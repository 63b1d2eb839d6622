#pragma once

#include <json.hpp>

#include <set>
#include <string>
#include <vector>

#include "cfl/errors.hpp"
#include "cfl/rational.hpp"

namespace cfl::jsonio {

using nlohmann::json;

inline void reject_unknown_fields(const json& obj, const std::set<std::string>& allowed,
                                  const std::string& context) {
  if (!obj.is_object()) throw SchemaError(context + ": expected an object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw SchemaError(context + ": unknown field '" + item.key() + "'");
}

inline const json& require_field(const json& obj, const std::string& key,
                                 const std::string& context) {
  auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(context + ": missing field '" + key + "'");
  return *it;
}

inline int require_int(const json& obj, const std::string& key, const std::string& context) {
  const json& v = require_field(obj, key, context);
  if (!v.is_number_integer()) throw SchemaError(context + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

inline std::string require_string(const json& obj, const std::string& key,
                                  const std::string& context) {
  const json& v = require_field(obj, key, context);
  if (!v.is_string()) throw SchemaError(context + ": field '" + key + "' must be a string");
  return v.get<std::string>();
}

/// Rational fields accept "p/q" strings, decimal strings, and plain JSON
/// integers; JSON floats are rejected to keep file round-trips exact.
inline Rat require_rational(const json& obj, const std::string& key, const std::string& context) {
  const json& v = require_field(obj, key, context);
  if (v.is_number_integer()) return Rat(BigInt(v.get<long long>()));
  if (v.is_string()) return parse_rational(v.get<std::string>());
  throw SchemaError(context + ": field '" + key + "' must be a rational string or integer");
}

inline std::vector<int> require_int_array(const json& obj, const std::string& key,
                                          const std::string& context) {
  const json& v = require_field(obj, key, context);
  if (!v.is_array()) throw SchemaError(context + ": field '" + key + "' must be an array");
  std::vector<int> out;
  for (const json& e : v) {
    if (!e.is_number_integer())
      throw SchemaError(context + ": field '" + key + "' must contain integers");
    out.push_back(e.get<int>());
  }
  return out;
}

inline json parse_document(const std::string& text, const std::string& context) {
  json doc = json::parse(text, nullptr, false);
  if (doc.is_discarded()) throw SchemaError(context + ": malformed document");
  return doc;
}

}  // namespace cfl::jsonio
