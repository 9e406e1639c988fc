#include "xros/scheduler.hpp"

#include <algorithm>
#include <cmath>

namespace xros {

const char* to_string(FovRelation r) {
    switch (r) {
        case FovRelation::InView: return "in_view";
        case FovRelation::NearConcealed: return "near_concealed";
        case FovRelation::Far: return "far";
    }
    return "?";
}

FovRelation classify_fov(std::span<const ContentPlacement> app_placements, const Frustum& frustum,
                         double d_near_m) {
    if (app_placements.empty()) return FovRelation::Far;
    bool near = false;
    for (const auto& p : app_placements) {
        if (aabb_intersects_frustum(p.bounds, frustum)) return FovRelation::InView;
        if (distance(p.bounds, frustum.origin) <= d_near_m) near = true;
    }
    return near ? FovRelation::NearConcealed : FovRelation::Far;
}

void Scheduler::register_app(const AppProcess& app) {
    if (app.demand_us <= 0) throw SimError("app demand must be positive");
    table_[app.id] = app;
}

AppProcess* Scheduler::find(uint64_t id) {
    auto it = table_.find(id);
    return it == table_.end() ? nullptr : &it->second;
}

const AppProcess* Scheduler::find(uint64_t id) const {
    auto it = table_.find(id);
    return it == table_.end() ? nullptr : &it->second;
}

void Scheduler::update_fov(uint64_t app, FovRelation rel) {
    if (auto* a = find(app)) a->fov = rel;
}

std::vector<Grant> Scheduler::schedule_frame(FrameBudget& budget, Ledger& ledger) {
    if (budget.spent_us != 0) throw SimError("schedule_frame requires a fresh budget");

    std::vector<uint64_t> classes[3];
    for (const auto& [id, app] : table_) {
        if (app.state != AppState::Running) continue;
        classes[static_cast<int>(app.fov)].push_back(id);
    }
    // Round-robin: rotate the id-sorted class by frame index so every member
    // leads its class once every |class| frames.
    for (auto& cls : classes) {
        if (cls.size() > 1) std::rotate(cls.begin(), cls.begin() + frame_counter_ % cls.size(), cls.end());
    }

    std::vector<Grant> grants;
    int64_t remaining = budget.interframe_us;

    for (uint64_t id : classes[static_cast<int>(FovRelation::InView)]) {
        AppProcess& app = table_.at(id);
        int64_t floor_us = static_cast<int64_t>(std::ceil(app.demand_us * cfg_.precompute_demand_floor));
        int64_t effective = std::max(floor_us, app.demand_us - app.precompute_credit_us);
        app.precompute_credit_us = 0;
        int64_t granted = std::min(effective, remaining);
        if (granted < effective) ledger.count("deadline_misses");
        if (granted > 0) grants.push_back({id, FovRelation::InView, granted});
        remaining -= granted;
    }
    for (uint64_t id : classes[static_cast<int>(FovRelation::NearConcealed)]) {
        if (remaining <= 0) break;
        AppProcess& app = table_.at(id);
        int64_t granted = std::min(app.demand_us, remaining);
        if (granted > 0) {
            grants.push_back({id, FovRelation::NearConcealed, granted});
            int64_t credit_cap =
                static_cast<int64_t>(app.demand_us * (1.0 - cfg_.precompute_demand_floor));
            app.precompute_credit_us = std::min(app.precompute_credit_us + granted, credit_cap);
        }
        remaining -= granted;
    }
    for (uint64_t id : classes[static_cast<int>(FovRelation::Far)]) {
        if (remaining <= 0) break;
        AppProcess& app = table_.at(id);
        int64_t granted = std::min(app.demand_us, remaining);
        if (granted > 0) grants.push_back({id, FovRelation::Far, granted});
        remaining -= granted;
    }

    budget.spent_us = budget.interframe_us - remaining;
    ++frame_counter_;
    return grants;
}

int64_t Scheduler::context_switch(uint64_t from, uint64_t to, MotionCondition condition,
                                  bool target_in_view, size_t target_placements,
                                  int64_t interframe_us, SimTime now, RngStream& rng,
                                  Ledger& ledger) {
    if (from == to) throw SimError("context switch requires two distinct apps");
    AppProcess* src = find(from);
    AppProcess* dst = find(to);
    if (!src || !dst) throw UnknownAppError("context switch with unregistered app");

    ledger.count("context_switches");
    if (dst->mode == ExecMode::SharedModel) {
        // Content re-binds against the shared model within the frame; tracking
        // is never lost.
        int64_t cost = cfg_.rebind_base_us +
                       cfg_.rebind_per_placement_us * static_cast<int64_t>(target_placements);
        cost = std::min(cost, interframe_us);
        ledger.add_time("switch_cost_total", cost);
        return cost;
    }

    double mean = condition == MotionCondition::Static ? cfg_.recovery_static_mean_us
                                                       : cfg_.recovery_moving_mean_us;
    double stdev = condition == MotionCondition::Static ? cfg_.recovery_static_stdev_us
                                                        : cfg_.recovery_moving_stdev_us;
    int64_t cost = static_cast<int64_t>(std::llround(std::max(0.0, rng.normal(mean, stdev))));
    if (!target_in_view) cost += cfg_.out_of_view_penalty_us;
    dst->recovery_until = now + cost;
    ledger.count("tracking_recovery_events");
    ledger.add_time("tracking_recovery_total", cost);
    ledger.add_time("switch_cost_total", cost);
    return cost;
}

}  // namespace xros
