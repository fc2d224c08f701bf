#pragma once

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

namespace ehrcheck::gateway {

using nlohmann::json;

// Validator for the JSON-schema subset the engine's response schemas use:
// type (string or list), properties, required, additionalProperties (bool),
// items, enum, minLength, minItems, maxItems, minimum, maximum.
// Returns nullopt when `value` conforms, else a path-qualified message.
std::optional<std::string> validate_schema(const json& schema, const json& value);

// Object schema that forbids additional properties at the top level.
bool is_closed_object_schema(const json& schema);

// Helpers for the shapes the engine asks models for.
json object_schema(std::initializer_list<std::pair<const char*, json>> properties);
json string_schema(std::size_t min_length = 0);
json boolean_schema();
json string_array_schema();

}  // namespace ehrcheck::gateway
