#pragma once

#include <string>
#include <vector>

#include "json.hpp"

namespace sciatlas {

/// Validates against the subset of JSON Schema the map schema uses: type,
/// required, properties, additionalProperties, items, maxItems, enum,
/// pattern, minimum, oneOf, anyOf and local $ref. Returns one message per
/// violation, prefixed with the JSON pointer of the offending value.
std::vector<std::string> schema_errors(const nlohmann::json& schema, const nlohmann::json& instance,
                                       std::size_t max_errors = 50);

}  // namespace sciatlas
