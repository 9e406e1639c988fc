#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "xros/interaction.hpp"
#include "xros/network.hpp"
#include "xros/offloading.hpp"
#include "xros/privacy.hpp"
#include "xros/scenario.hpp"
#include "xros/scheduler.hpp"
#include "xros/sim_core.hpp"
#include "xros/world_model.hpp"

namespace xros {

struct DecisionRow {
    SimTime time_us = 0;
    uint64_t task = 0;
    std::string placement;  // "local" or server id
    double cost_us = 0.0;
    bool feasible = true;
    std::string infeasible_reason;
    bool chosen = false;
    bool pinned = false;
};

struct BlockRow {
    SimTime time_us = 0;
    uint64_t block = 0;
    std::string purpose;  // task_uplink | task_downlink | merge_out | merge_in
    RecoveryMode mode = RecoveryMode::NackOnly;
    int k = 1;
    int redundancy = 0;
    TransmitResult result;
};

struct RenderRow {
    uint64_t frame = 0;
    uint64_t app = 0;
    uint64_t placement = 0;
    double relevance = 0.0;
};

struct RunReport {
    Ledger ledger;
    int exit_code = 0;
    std::string violation;  // empty on clean runs
    bool taint_violation = false;

    PrivacyAudit audit;
    std::vector<DecisionRow> decisions;
    std::vector<BlockRow> blocks;
    std::vector<RenderRow> render_log;
    std::vector<WorldElement> shared_out;   // everything that passed the network gate
    std::vector<WorldElement> final_store;  // world model contents at termination
    std::vector<SimEvent> trace;
    uint64_t events_scheduled = 0;
    SimTime clock_us = 0;
};

// Wires every module into one deterministic run of a scenario.
class Simulation {
public:
    explicit Simulation(Scenario scenario);

    RunReport run();

    const WorldModel& world() const { return world_; }

private:
    struct TaskRecord {
        uint64_t id = 0;
        uint64_t app = 0;
        TaskSpec spec;
        TaskKind kind = TaskKind::Generic;
        uint64_t target = 0;
        Placement placement;
        SimTime submit_time = 0;
        SimTime expected_completion = 0;
        uint64_t generation = 0;
        bool done = false;
        Pose view_at_submit;  // world->device transform at submission
        uint64_t recog_request = 0;
    };

    void boot();
    void on_event(const SimEvent& ev);
    void on_frame_tick(const FrameTickPayload& tick);
    void on_sensor_frame(const SensorFramePayload& sf);
    void on_user_moved(const UserMovedPayload& um);
    void on_policy_changed(const PolicyChangedPayload& pc);
    void on_handover(const HandoverTriggeredPayload& ho);
    void on_task_done(const TaskDonePayload& td);
    void on_packet_arrival(const PacketArrivalPayload& pa);

    void process_pending_switches();
    void process_pending_tasks();
    void process_pending_merges();
    void process_taint_injection();
    void submit_task(const ScenarioTask& st);
    void do_remote_merge(const RemoteMerge& rm);
    void route_user_action(const Ray& ray);

    Frustum current_frustum() const;
    std::vector<std::string> servers_in_cell(const std::string& cell) const;
    Profile build_profile(const TaskSpec& spec) const;
    LinkState link_for_server(const std::string& server) const;
    LinkState access_link() const;
    const ScenarioServer* server_info(const std::string& id) const;
    BlockRow transmit(int64_t bytes, const LinkState& link, int64_t slack_us,
                      const std::string& purpose);

    Scenario scn_;
    Engine engine_;
    WorldModel world_;
    Scheduler sched_;
    PolicySet policy_;
    EdgeSession session_;
    RecognitionTracker recognition_;
    RunReport report_;

    Pose user_pose_;
    double user_speed_mps_ = 0.0;
    double user_angular_speed_ = 0.0;
    std::string context_;
    std::string cell_;
    uint64_t focused_app_ = 0;

    std::map<uint64_t, TaskRecord> tasks_;
    std::map<uint64_t, std::vector<WorldElement>> pending_merges_;  // block id -> payload
    size_t next_switch_ = 0;
    size_t next_task_ = 0;
    size_t next_merge_ = 0;
    bool taint_injected_ = false;
    uint64_t next_block_id_ = 1;
    uint64_t next_recog_request_ = 1;
    int64_t last_mtp_us_ = 0;
};

// Writes ledger.txt, series_*.csv, decisions.csv, blocks.csv,
// privacy_audit.csv and (optionally) render_log.csv into out_dir.
void write_outputs(const RunReport& report, const std::string& out_dir, bool render_log);

}  // namespace xros
