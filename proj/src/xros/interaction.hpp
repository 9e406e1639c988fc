#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>

#include "xros/geometry.hpp"
#include "xros/sim_core.hpp"

namespace xros {

enum class ProxemicZone { Intimate, Personal, Social, Public };

const char* to_string(ProxemicZone z);

// Hall's proxemic distances; boundaries are inclusive on the lower zone.
struct ZoneThresholds {
    double intimate_m = 0.45;
    double personal_m = 1.2;
    double social_m = 3.6;
};

ProxemicZone classify_zone(const Vec3& element_pos, const Vec3& user_pos,
                           const ZoneThresholds& thresholds = {});

struct IoCandidate {
    uint64_t element = 0;
    ProxemicZone zone = ProxemicZone::Public;
    bool input_role = false;   // "clickable"
    bool output_role = false;  // "to-be-augmented"
    Aabb bounds;
};

// Nearest ray-AABB hit among Input-role candidates; ties by smaller element
// id. Invariant under candidate permutation.
std::optional<uint64_t> route_input(const Ray& ray, std::span<const IoCandidate> candidates);

constexpr double kDefaultArmLengthM = 0.6;

// Geometric latency compensation: targets grow linearly with angular speed and
// motion-to-photon latency (small-angle drift over the arm's reach), capped at
// three times the base radius.
double enlarge_target(double base_radius_m, double angular_speed_rad_s, int64_t mtp_latency_us,
                      double arm_length_m = kDefaultArmLengthM);

// Remote recognition result re-anchoring: the result was computed against the
// device pose at submission; composing with the motion since then keeps the
// overlay glued under rigid device motion.
Pose compensate_recognition(const Pose& result_pose, const Pose& pose_at_submit,
                            const Pose& device_pose_now);

struct PendingRecognition {
    uint64_t request_id = 0;
    uint64_t target = 0;  // world element the recognition is about
    SimTime submitted_at = 0;
    Pose pose_at_submit;
};

// Tracks outstanding recognition requests per target and enforces
// exactly-once, newest-wins application of results.
class RecognitionTracker {
public:
    void submit(const PendingRecognition& req);
    // Returns the stored request; throws StaleRequestError when a newer result
    // for the same target was already applied.
    PendingRecognition apply(uint64_t target, uint64_t request_id);
    size_t pending() const { return pending_.size(); }

private:
    std::map<uint64_t, PendingRecognition> pending_;       // keyed by target
    std::map<uint64_t, uint64_t> last_applied_;            // target -> request id
};

}  // namespace xros
