#include "xros/privacy.hpp"

#include <algorithm>
#include <cmath>

namespace xros {

const char* to_string(RuleAction a) {
    switch (a) {
        case RuleAction::Allow: return "allow";
        case RuleAction::Redact: return "redact";
        case RuleAction::Drop: return "drop";
    }
    return "?";
}

std::optional<RuleAction> rule_action_from(std::string_view s) {
    if (s == "allow") return RuleAction::Allow;
    if (s == "redact") return RuleAction::Redact;
    if (s == "drop") return RuleAction::Drop;
    return std::nullopt;
}

bool UserRule::applies(const WorldElement& e) const {
    if (match.starts_with("tag:")) {
        auto want = sensitivity_from(match.substr(4));
        return want && e.tag == *want;
    }
    if (match.starts_with("label:")) {
        std::string label = match.substr(6);
        return std::find(e.labels.begin(), e.labels.end(), label) != e.labels.end();
    }
    return false;
}

namespace {
double snap(double v) { return std::round(v / kRedactGridM) * kRedactGridM; }

WorldElement redacted(const WorldElement& e) {
    WorldElement out = e;
    Vec3 snapped{snap(e.pose.position.x), snap(e.pose.position.y), snap(e.pose.position.z)};
    Vec3 delta = snapped - e.pose.position;
    out.pose.position = snapped;
    out.extent = e.extent.translated(delta);  // moves rigidly with the pose
    out.labels.clear();
    out.tag = Sensitivity::Private;
    return out;
}
}  // namespace

SensorFrame filter_input(const SensorFrame& frame, const PolicySet& policy, SimTime now,
                         Ledger* ledger, PrivacyAudit* audit) {
    SensorFrame out;
    out.context = frame.context;
    // bystander regions are consumed here; the cleaned frame carries none
    for (const auto& e : frame.elements) {
        // OS floor: bystander data never passes
        bool bystander = e.tag == Sensitivity::Bystander;
        for (const auto& region : frame.bystander_regions) {
            if (bystander) break;
            if (e.extent.intersects(region)) bystander = true;
        }
        if (bystander) {
            if (ledger) ledger->count("privacy_drops");
            if (audit) audit->log(now, "input", "drop_bystander", e.id);
            continue;
        }
        // User tier, first match wins. Redaction re-enters evaluation until a
        // fixed point so that filtering a filtered frame changes nothing
        // (a redacted element may match a tag rule its original form did not).
        WorldElement cur = e;
        bool keep = true;
        for (int iter = 0; iter < 4; ++iter) {
            const UserRule* rule = nullptr;
            for (const auto& r : policy.user_rules) {
                if (r.applies(cur)) {
                    rule = &r;
                    break;
                }
            }
            if (!rule || rule->action == RuleAction::Allow) break;
            if (rule->action == RuleAction::Drop) {
                if (ledger) ledger->count("privacy_drops");
                if (audit) audit->log(now, "input", "drop_rule", cur.id);
                keep = false;
                break;
            }
            WorldElement next = redacted(cur);
            if (next == cur) break;  // already at the redaction fixed point
            if (ledger) ledger->count("privacy_redactions");
            if (audit) audit->log(now, "input", "redact", cur.id);
            cur = next;
        }
        if (keep) out.elements.push_back(cur);
    }
    return out;
}

std::vector<WorldElement> gate_network_share(std::span<const WorldElement> outbound,
                                             const PolicySet& policy, SimTime now, Ledger* ledger,
                                             PrivacyAudit* audit) {
    std::vector<WorldElement> permitted;
    for (const auto& e : outbound) {
        if (e.tag == Sensitivity::Bystander)
            throw TaintViolation("bystander element " + std::to_string(e.id) +
                                 " reached the network share gate");
        if (e.tag == Sensitivity::Private && !policy.data_share_ok) {
            if (ledger) ledger->count("share_minimised");
            if (audit) audit->log(now, "network_gate", "drop_private", e.id);
            continue;
        }
        permitted.push_back(e);
    }
    return permitted;
}

std::vector<ContentPlacement> filter_output(std::span<const ContentPlacement> rendered,
                                            const std::string& context, const PolicySet& policy,
                                            SimTime now, Ledger* ledger, PrivacyAudit* audit) {
    const ContextRule* rule = nullptr;
    for (const auto& r : policy.context_rules) {
        if (r.context == context) {
            rule = &r;
            break;
        }
    }
    std::vector<ContentPlacement> out;
    for (const auto& p : rendered) {
        bool obscures = false;
        for (const auto& box : policy.safety_critical_objects) {
            if (p.bounds.overlaps_interior(box)) {
                obscures = true;
                break;
            }
        }
        if (obscures) {
            // OS floor: physical safety information outranks any overlay,
            // including Safety-priority content.
            if (ledger) ledger->count("output_obscuring_removed");
            if (audit) audit->log(now, "output", "drop_obscuring", p.placement_id);
            continue;
        }
        if (p.priority != PlacePriority::Safety && rule && rule->suppress.count(p.priority)) {
            if (ledger) ledger->count("output_suppressed");
            if (audit) audit->log(now, "output", "drop_context", p.placement_id);
            continue;
        }
        out.push_back(p);
    }
    return out;
}

}  // namespace xros
