#pragma once

#include <string>

#include "json.hpp"
#include "mcnb/policy.hpp"

namespace mcnb {

// versioned snapshot of the full M-CNB learner state: shape header, flat
// weight arrays, optimizer moments, per-user serve counts and histories
inline constexpr const char* kStateFormat = "mcnb-state-v1";

nlohmann::json policy_state_to_json(const McnbPolicy& policy);

// rebuilds the state into a policy constructed with the same config;
// throws DataFormatError on version or shape mismatch
void policy_state_from_json(McnbPolicy& policy, const nlohmann::json& doc);

void save_policy_state(const McnbPolicy& policy, const std::string& path);
void load_policy_state(McnbPolicy& policy, const std::string& path);

}  // namespace mcnb
