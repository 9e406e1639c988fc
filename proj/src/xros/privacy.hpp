#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "xros/geometry.hpp"
#include "xros/sim_core.hpp"
#include "xros/world_model.hpp"

namespace xros {

enum class RuleAction { Allow, Redact, Drop };

const char* to_string(RuleAction a);
std::optional<RuleAction> rule_action_from(std::string_view s);

// Matches either a sensitivity tag ("tag:private") or a semantic label
// ("label:face").
struct UserRule {
    std::string match;
    RuleAction action = RuleAction::Allow;

    bool applies(const WorldElement& e) const;
};

struct ContextRule {
    std::string context;
    std::set<PlacePriority> suppress;  // Safety is never suppressible
};

// Rule tiers evaluate OS floor first, then user rules (first match wins), then
// context rules. The OS floor is not overridable.
struct PolicySet {
    std::vector<UserRule> user_rules;
    std::vector<ContextRule> context_rules;
    bool data_share_ok = true;
    std::vector<Aabb> safety_critical_objects;  // physical objects that must stay visible
};

// Redaction parameters: pose snapped to this grid, semantic labels stripped.
constexpr double kRedactGridM = 0.5;

struct SensorFrame {
    std::vector<WorldElement> elements;
    std::vector<Aabb> bystander_regions;  // scenario ground truth
    std::string context;
};

struct AuditRow {
    SimTime time = 0;
    std::string stage;   // input | network_gate | output
    std::string action;  // drop_bystander | drop_rule | redact | drop_private | drop_context | drop_obscuring
    uint64_t id = 0;
};

struct PrivacyAudit {
    std::vector<AuditRow> rows;

    void log(SimTime t, std::string stage, std::string action, uint64_t id) {
        rows.push_back({t, std::move(stage), std::move(action), id});
    }
};

// Input protection layer between raw sensor data and everything downstream.
// Elements touching a bystander region (or already tagged Bystander) are
// dropped; user Redact rules quantize pose to the redaction grid, strip labels
// and mark the element Private; Drop rules remove. Idempotent.
SensorFrame filter_input(const SensorFrame& frame, const PolicySet& policy, SimTime now = 0,
                         Ledger* ledger = nullptr, PrivacyAudit* audit = nullptr);

// Outbound sharing gate: Private elements pass only with data_share_ok; a
// Bystander element at this point means the input layer was bypassed and
// throws TaintViolation.
std::vector<WorldElement> gate_network_share(std::span<const WorldElement> outbound,
                                             const PolicySet& policy, SimTime now = 0,
                                             Ledger* ledger = nullptr,
                                             PrivacyAudit* audit = nullptr);

// Output policy manager: context rules suppress non-Safety classes; nothing
// may obscure a safety-critical physical object (this floor outranks even
// Safety-priority placements).
std::vector<ContentPlacement> filter_output(std::span<const ContentPlacement> rendered,
                                            const std::string& context, const PolicySet& policy,
                                            SimTime now = 0, Ledger* ledger = nullptr,
                                            PrivacyAudit* audit = nullptr);

}  // namespace xros
