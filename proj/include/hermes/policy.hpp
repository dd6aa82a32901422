#pragma once

// Token-table policy engine consulted when a route carries a policy_gate.
// Fail-closed: anything not explicitly allowed is denied.

#include <string>
#include <vector>

#include "hermes/model.hpp"

namespace hermes::policy {

struct Decision {
    bool allow{false};
    HeaderMap append;
};

// Pure lookup against the active config's policy table. A missing rule or an
// unknown token denies with an empty append.
Decision evaluate(const std::vector<PolicyRule>& rules, const std::string& rule_id,
                  const std::string& token);

}  // namespace hermes::policy
