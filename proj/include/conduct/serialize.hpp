#pragma once

// nlohmann/json bindings for the value types.

#include <json.hpp>

#include "conduct/model.hpp"

namespace conduct {

void to_json(nlohmann::json& j, const StructuralParams& p);
// Unknown keys are rejected; missing keys keep their current value.
void from_json(const nlohmann::json& j, StructuralParams& p);

}  // namespace conduct
