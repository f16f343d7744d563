#pragma once

#include <string>

#include "json.hpp"

#include "dmab/environments.hpp"
#include "dmab/metrics.hpp"

namespace dmab {

inline constexpr int kSchemaVersion = 1;

nlohmann::json to_json(const EnvSpec& spec);
// Missing optional fields take the EnvSpec defaults. Throws SpecError on
// wrong types or unknown variants.
EnvSpec env_spec_from_json(const nlohmann::json& j);

nlohmann::json metadata_to_json(const GroundTruth& gt);

nlohmann::json to_json(const RegretReport& report);

// printf("%.*g") with the given significant digits.
std::string format_real(double value, int significant_digits = 9);

}  // namespace dmab
