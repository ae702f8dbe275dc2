#pragma once

#include <optional>
#include <string>

#include <json.hpp>

namespace ahy {

using Json = nlohmann::ordered_json;

/// Serializes with doubles printed as %.17g and non-finite numbers as null.
std::string dumpJson(const Json& j, int indent = 2);

inline Json optionalNumber(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace ahy
