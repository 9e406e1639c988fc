#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "xros/geometry.hpp"
#include "xros/sim_core.hpp"
#include "xros/world_model.hpp"

namespace xros {

enum class AppState { Running, Background, Suspended };
enum class FovRelation { InView, NearConcealed, Far };
enum class ExecMode { SharedModel, IsolatedModel };
enum class MotionCondition { Static, Moving };

const char* to_string(FovRelation r);

struct AppProcess {
    uint64_t id = 0;
    AppState state = AppState::Running;
    FovRelation fov = FovRelation::Far;
    int64_t demand_us = 1;  // per-frame compute demand
    ExecMode mode = ExecMode::SharedModel;
    std::optional<SimTime> recovery_until;  // IsolatedModel: tracking re-established at this time
    int64_t precompute_credit_us = 0;       // earned while NearConcealed, spent on next InView frame
};

struct FrameBudget {
    int64_t interframe_us = kInterframe60Us;
    int64_t spent_us = 0;
};

struct Grant {
    uint64_t app = 0;
    FovRelation cls = FovRelation::Far;
    int64_t granted_us = 0;
};

struct SchedulerConfig {
    double d_near_m = 3.0;  // NearConcealed distance
    // Shared-model context switch: content re-bind cost per placement.
    int64_t rebind_base_us = 200;
    int64_t rebind_per_placement_us = 500;
    // Isolated-model tracking recovery statistics.
    double recovery_static_mean_us = 1'350'000;
    double recovery_static_stdev_us = 290'000;
    double recovery_moving_mean_us = 1'530'000;
    double recovery_moving_stdev_us = 490'000;
    int64_t out_of_view_penalty_us = 3'000'000;
    // Pre-compute credit may reduce demand to this floor fraction, not below.
    double precompute_demand_floor = 0.2;
};

// InView when any placement intersects the frustum; NearConcealed when content
// sits within d_near of the user but out of view; Far otherwise (including
// apps with nothing placed).
FovRelation classify_fov(std::span<const ContentPlacement> app_placements, const Frustum& frustum,
                         double d_near_m);

class Scheduler {
public:
    explicit Scheduler(SchedulerConfig cfg = {}) : cfg_(cfg) {}

    const SchedulerConfig& config() const { return cfg_; }

    void register_app(const AppProcess& app);
    AppProcess* find(uint64_t id);
    const AppProcess* find(uint64_t id) const;
    const std::map<uint64_t, AppProcess>& table() const { return table_; }

    void update_fov(uint64_t app, FovRelation rel);

    // Fills the frame in strict class order InView > NearConcealed > Far,
    // round-robin within a class. InView apps whose demand cannot fit get the
    // remainder and a deadline_miss. Never over-commits the budget.
    std::vector<Grant> schedule_frame(FrameBudget& budget, Ledger& ledger);

    // Returns the switch cost in µs and books recovery metrics. Shared-model
    // switches re-bind content within the frame; isolated-model switches pay a
    // sampled tracking-recovery delay, plus the out-of-view penalty when the
    // target's content is not in the frustum.
    int64_t context_switch(uint64_t from, uint64_t to, MotionCondition condition,
                           bool target_in_view, size_t target_placements, int64_t interframe_us,
                           SimTime now, RngStream& rng, Ledger& ledger);

    uint64_t frames_scheduled() const { return frame_counter_; }

private:
    SchedulerConfig cfg_;
    std::map<uint64_t, AppProcess> table_;
    uint64_t frame_counter_ = 0;
};

}  // namespace xros
