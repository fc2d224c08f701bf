#include "ehrcheck/gateway/json_schema.hpp"

#include <algorithm>

namespace ehrcheck::gateway {

namespace {

bool type_matches(const std::string& type, const json& v) {
  if (type == "object") return v.is_object();
  if (type == "array") return v.is_array();
  if (type == "string") return v.is_string();
  if (type == "boolean") return v.is_boolean();
  if (type == "integer") return v.is_number_integer();
  if (type == "number") return v.is_number();
  if (type == "null") return v.is_null();
  return false;
}

std::optional<std::string> check(const json& schema, const json& v, const std::string& path) {
  auto fail = [&](const std::string& msg) { return std::optional<std::string>(path + ": " + msg); };

  if (auto it = schema.find("type"); it != schema.end()) {
    bool ok = false;
    if (it->is_string()) ok = type_matches(it->get<std::string>(), v);
    else if (it->is_array())
      ok = std::any_of(it->begin(), it->end(), [&](const json& t) { return type_matches(t.get<std::string>(), v); });
    if (!ok) return fail("expected type " + it->dump() + ", got " + std::string(v.type_name()));
  }
  if (auto it = schema.find("enum"); it != schema.end()) {
    if (std::find(it->begin(), it->end(), v) == it->end()) return fail("value " + v.dump() + " not in enum");
  }
  if (v.is_string()) {
    if (auto it = schema.find("minLength"); it != schema.end() && v.get_ref<const std::string&>().size() < it->get<std::size_t>())
      return fail("string shorter than " + it->dump());
  }
  if (v.is_number()) {
    if (auto it = schema.find("minimum"); it != schema.end() && v.get<double>() < it->get<double>())
      return fail("below minimum");
    if (auto it = schema.find("maximum"); it != schema.end() && v.get<double>() > it->get<double>())
      return fail("above maximum");
  }
  if (v.is_array()) {
    if (auto it = schema.find("minItems"); it != schema.end() && v.size() < it->get<std::size_t>())
      return fail("too few items");
    if (auto it = schema.find("maxItems"); it != schema.end() && v.size() > it->get<std::size_t>())
      return fail("too many items");
    if (auto it = schema.find("items"); it != schema.end()) {
      for (std::size_t i = 0; i < v.size(); ++i)
        if (auto err = check(*it, v[i], path + "[" + std::to_string(i) + "]")) return err;
    }
  }
  if (v.is_object()) {
    const json empty = json::object();
    const json& props = schema.contains("properties") ? schema["properties"] : empty;
    if (auto it = schema.find("required"); it != schema.end()) {
      for (const auto& key : *it)
        if (!v.contains(key.get<std::string>())) return fail("missing required key '" + key.get<std::string>() + "'");
    }
    const bool closed = schema.contains("additionalProperties") && schema["additionalProperties"] == false;
    for (auto it = v.begin(); it != v.end(); ++it) {
      if (props.contains(it.key())) {
        if (auto err = check(props[it.key()], it.value(), path + "." + it.key())) return err;
      } else if (closed) {
        return fail("unexpected key '" + it.key() + "'");
      }
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::string> validate_schema(const json& schema, const json& value) { return check(schema, value, "$"); }

bool is_closed_object_schema(const json& schema) {
  return schema.is_object() && schema.value("type", "") == "object" && schema.contains("additionalProperties") &&
         schema["additionalProperties"] == false;
}

json object_schema(std::initializer_list<std::pair<const char*, json>> properties) {
  json props = json::object();
  json required = json::array();
  for (const auto& [name, sub] : properties) {
    props[name] = sub;
    required.push_back(name);
  }
  return json{{"type", "object"}, {"properties", props}, {"required", required}, {"additionalProperties", false}};
}

json string_schema(std::size_t min_length) {
  json s{{"type", "string"}};
  if (min_length > 0) s["minLength"] = min_length;
  return s;
}

json boolean_schema() { return json{{"type", "boolean"}}; }

json string_array_schema() { return json{{"type", "array"}, {"items", {{"type", "string"}}}}; }

}  // namespace ehrcheck::gateway
