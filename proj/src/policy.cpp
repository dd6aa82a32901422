#include "hermes/policy.hpp"

namespace hermes::policy {

Decision evaluate(const std::vector<PolicyRule>& rules, const std::string& rule_id,
                  const std::string& token) {
    const PolicyRule* rule = nullptr;
    for (const auto& r : rules) {
        if (r.id == rule_id) {
            rule = &r;
            break;
        }
    }
    if (rule == nullptr) return {};
    const auto it = rule->tokens.find(token);
    if (it == rule->tokens.end()) return {};
    if (it->second.decision != PolicyDecision::allow) return {};
    return {true, it->second.append};
}

}  // namespace hermes::policy
