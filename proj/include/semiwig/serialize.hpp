#pragma once

#include "json.hpp"
#include "semiwig/airy_layer.hpp"
#include "semiwig/classical.hpp"

namespace semiwig {

// {"kind": "isotropic", "dimension": 1} etc.; see README for the schema.
classical::Potential potential_from_json(const nlohmann::json& j);
nlohmann::ordered_json potential_to_json(const classical::Potential& pot,
                                         const nlohmann::json& original_spec);

airy::Convention convention_from_json(const nlohmann::json& j);
nlohmann::ordered_json convention_to_json(const airy::Convention& conv);

}  // namespace semiwig
