#include "xros/interaction.hpp"

#include <algorithm>
#include <limits>

namespace xros {

const char* to_string(ProxemicZone z) {
    switch (z) {
        case ProxemicZone::Intimate: return "intimate";
        case ProxemicZone::Personal: return "personal";
        case ProxemicZone::Social: return "social";
        case ProxemicZone::Public: return "public";
    }
    return "?";
}

ProxemicZone classify_zone(const Vec3& element_pos, const Vec3& user_pos,
                           const ZoneThresholds& t) {
    if (!(t.intimate_m < t.personal_m && t.personal_m < t.social_m))
        throw SimError("zone thresholds must be strictly increasing");
    double d = length(element_pos - user_pos);
    if (d <= t.intimate_m) return ProxemicZone::Intimate;
    if (d <= t.personal_m) return ProxemicZone::Personal;
    if (d <= t.social_m) return ProxemicZone::Social;
    return ProxemicZone::Public;
}

std::optional<uint64_t> route_input(const Ray& ray, std::span<const IoCandidate> candidates) {
    std::optional<uint64_t> best;
    double best_t = std::numeric_limits<double>::infinity();
    for (const auto& c : candidates) {
        if (!c.input_role) continue;
        auto t = ray_aabb(ray, c.bounds);
        if (!t) continue;
        if (*t < best_t || (*t == best_t && best && c.element < *best)) {
            best_t = *t;
            best = c.element;
        }
    }
    return best;
}

double enlarge_target(double base_radius_m, double angular_speed_rad_s, int64_t mtp_latency_us,
                      double arm_length_m) {
    if (base_radius_m < 0 || angular_speed_rad_s < 0 || mtp_latency_us < 0)
        throw SimError("enlarge_target inputs must be non-negative");
    double drift = angular_speed_rad_s * (mtp_latency_us / 1e6) * arm_length_m;
    return std::min(base_radius_m + drift, 3.0 * base_radius_m);
}

Pose compensate_recognition(const Pose& result_pose, const Pose& pose_at_submit,
                            const Pose& device_pose_now) {
    return compose(compose(device_pose_now, inverse(pose_at_submit)), result_pose);
}

void RecognitionTracker::submit(const PendingRecognition& req) {
    pending_[req.target] = req;
}

PendingRecognition RecognitionTracker::apply(uint64_t target, uint64_t request_id) {
    auto applied = last_applied_.find(target);
    if (applied != last_applied_.end() && applied->second >= request_id)
        throw StaleRequestError("a newer recognition result was already applied for target " +
                                std::to_string(target));
    auto it = pending_.find(target);
    if (it == pending_.end() || it->second.request_id != request_id)
        throw StaleRequestError("recognition request " + std::to_string(request_id) +
                                " superseded for target " + std::to_string(target));
    PendingRecognition out = it->second;
    pending_.erase(it);
    last_applied_[target] = request_id;
    return out;
}

}  // namespace xros
