#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xros/display.hpp"
#include "xros/interaction.hpp"
#include "xros/network.hpp"
#include "xros/offloading.hpp"
#include "xros/privacy.hpp"
#include "xros/scheduler.hpp"
#include "xros/sim_core.hpp"
#include "xros/world_model.hpp"

namespace xros {

struct ValidationIssue {
    std::string field;  // e.g. "tasks[2].pin"
    std::string message;
};

struct ScenarioError : SimError {
    explicit ScenarioError(std::vector<ValidationIssue> issues);
    std::vector<ValidationIssue> issues;
};

struct ScenarioApp {
    uint64_t id = 0;
    int64_t demand_us = 1;
    bool private_clearance = false;
    std::string pin;  // "", "local" or a server id; honored absolutely
};

struct ScenarioServer {
    std::string id;
    std::string cell;  // empty: reachable from every cell (cloud)
    ServerSpec spec;
    std::string link;  // id into Scenario::links
};

struct CellCrossing {
    SimTime time_us = 0;
    std::string cell;
};

struct MotionSample {
    SimTime time_us = 0;
    Vec3 position;
    double yaw_deg = 0.0;
};

enum class TaskKind { Generic, Recognition };

struct ScenarioTask {
    SimTime time_us = 0;
    uint64_t app = 0;
    TaskSpec spec;
    std::string pin;  // "", "local" or server id
    TaskKind kind = TaskKind::Generic;
    uint64_t target = 0;  // recognition target element
};

struct ScenarioSwitch {
    SimTime time_us = 0;
    uint64_t from = 0;
    uint64_t to = 0;
};

struct ContextChange {
    SimTime time_us = 0;
    std::string context;
};

struct BystanderEvent {
    SimTime start_us = 0;
    SimTime end_us = 0;
    Aabb region;
};

struct InputEvent {
    SimTime time_us = 0;
    Ray ray;
};

struct IoRole {
    uint64_t element = 0;
    bool input = false;
    bool output = false;
};

struct RemoteMerge {
    SimTime time_us = 0;
    std::string device;
};

// One experiment: full parameterization of a simulation run, declared in a
// human-editable `xros-scenario v1` document.
struct Scenario {
    // [sim]
    uint64_t seed = 1;
    SimTime duration_us = 1'000'000;
    int frame_rate = 60;  // 30 | 60
    ExecMode mode = ExecMode::SharedModel;
    SimTime sensor_period_us = 33'333;
    double sensor_range_m = 10.0;
    double grid_cell_m = 0.5;
    int local_copy_budget = 128;
    std::string initial_cell;
    std::string initial_context = "stationary";

    // [energy]
    double compute_mj = 0.5;
    double radio_mj_per_byte = 2e-5;
    double message_mj = 0.01;

    // [display]
    DisplayBudget display;
    int coverage_grid = 64;
    int64_t display_base_latency_us = 3000;  // added to per-frame motion-to-photon samples

    // [frustum]
    double hfov_deg = 90.0;
    double vfov_deg = 60.0;
    double near_m = 0.1;
    double far_m = 50.0;

    // [scheduler]
    SchedulerConfig sched;

    // [offloading]
    bool offloading_enabled = true;
    OffloadingConfig offload;
    int block_k = 10;
    int bytes_per_element = 256;

    // [device] / [network] / [user_prefs]
    DeviceSpec device;
    NetworkSpec access_network;
    UserPrefs user_prefs;

    // [interaction]
    ZoneThresholds zones;
    double arm_length_m = kDefaultArmLengthM;
    double base_target_radius_m = 0.02;
    bool compensation = true;

    // [persistence]
    std::string persist_load;
    std::string persist_save;

    // [debug] fault injection: schedules one synthetic Bystander element past
    // the input filter to prove the taint barrier aborts the run.
    std::optional<SimTime> inject_taint_at_us;

    // tables
    std::vector<ScenarioApp> apps;
    std::vector<WorldElement> world;  // ground truth, source "seed", timestamp 0
    std::vector<ContentPlacement> placements;
    std::vector<std::pair<uint64_t, Aabb>> leases;  // explicit write leases (app, region)
    std::map<std::string, LinkState> links;
    std::vector<ScenarioServer> servers;
    std::vector<std::string> cells;
    std::vector<CellCrossing> crossings;
    std::vector<MotionSample> motion;
    std::vector<ScenarioTask> tasks;
    std::vector<ScenarioSwitch> switches;
    std::vector<UserRule> user_rules;
    std::vector<ContextRule> context_rules;
    std::vector<ContextChange> contexts;
    std::vector<BystanderEvent> bystander_events;
    std::vector<Aabb> safety_objects;
    std::vector<double> quality_ladder;
    std::vector<InputEvent> input_events;
    std::vector<IoRole> io_roles;
    std::map<std::string, std::vector<WorldElement>> remote_worlds;
    std::vector<RemoteMerge> remote_merges;
};

// Parses and validates; throws ScenarioError carrying every issue found, each
// naming the offending field path.
Scenario load_scenario_file(const std::string& path);
Scenario load_scenario_string(const std::string& text);

// Post-load scalar override, key form "section.key" (e.g. "sim.seed").
void apply_override(Scenario& s, const std::string& key, const std::string& value);

// Full validation pass, also run by the loaders.
std::vector<ValidationIssue> validate_scenario(const Scenario& s);

std::string serialize_scenario(const Scenario& s);

inline SimTime interframe_us(const Scenario& s) {
    return s.frame_rate == 30 ? kInterframe30Us : kInterframe60Us;
}

}  // namespace xros
