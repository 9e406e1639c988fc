#include "xros/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

namespace xros {

namespace {
constexpr int64_t kNoDeadline = std::numeric_limits<int64_t>::max() / 4;
constexpr double kPi = 3.14159265358979323846;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}
}  // namespace

Simulation::Simulation(Scenario scenario)
    : scn_(std::move(scenario)),
      engine_(scn_.seed),
      world_(scn_.grid_cell_m),
      sched_(scn_.sched) {
    policy_.user_rules = scn_.user_rules;
    policy_.context_rules = scn_.context_rules;
    policy_.data_share_ok = scn_.user_prefs.data_share_ok;
    policy_.safety_critical_objects = scn_.safety_objects;
    context_ = scn_.initial_context;
    cell_ = scn_.initial_cell;
    if (cell_.empty() && !scn_.cells.empty()) cell_ = scn_.cells.front();
}

Frustum Simulation::current_frustum() const {
    return make_frustum(user_pose_, scn_.hfov_deg * kPi / 180.0, scn_.vfov_deg * kPi / 180.0,
                        scn_.near_m, scn_.far_m);
}

std::vector<std::string> Simulation::servers_in_cell(const std::string& cell) const {
    std::vector<std::string> out;
    for (const auto& sv : scn_.servers)
        if (!sv.spec.cloud && sv.cell == cell) out.push_back(sv.id);
    std::sort(out.begin(), out.end());
    return out;
}

const ScenarioServer* Simulation::server_info(const std::string& id) const {
    for (const auto& sv : scn_.servers)
        if (sv.id == id) return &sv;
    return nullptr;
}

LinkState Simulation::access_link() const {
    return {scn_.access_network.latency_us, scn_.access_network.bandwidth_bps, 0.0, 0};
}

LinkState Simulation::link_for_server(const std::string& server) const {
    const ScenarioServer* sv = server_info(server);
    if (!sv) throw UnknownServerError("unknown server " + server);
    auto it = scn_.links.find(sv->link);
    if (it == scn_.links.end()) throw UnknownServerError("no link for server " + server);
    return it->second;
}

Profile Simulation::build_profile(const TaskSpec& spec) const {
    Profile p;
    p.network = scn_.access_network;
    p.device = scn_.device;
    p.user = scn_.user_prefs;
    p.task = spec;
    if (!scn_.offloading_enabled) return p;
    for (const auto& sv : scn_.servers) {
        bool reachable = sv.spec.cloud || sv.cell.empty() || sv.cell == cell_;
        if (!reachable) continue;
        ServerSpec s = sv.spec;
        auto link = scn_.links.find(sv.link);
        if (link != scn_.links.end()) {
            s.link = NetworkSpec{scn_.access_network.type, link->second.bandwidth_bps,
                                 link->second.latency_us};
        }
        p.servers[sv.id] = s;
    }
    return p;
}

BlockRow Simulation::transmit(int64_t bytes, const LinkState& link, int64_t slack_us,
                              const std::string& purpose) {
    RecoveryPlan plan = plan_recovery(link, slack_us, scn_.block_k);
    TransmitResult res = transmit_block(bytes, link, plan, slack_us, engine_.rng().stream("network"));
    engine_.ledger().charge_energy("network", EnergyKind::Radio,
                                   res.bytes_sent * scn_.radio_mj_per_byte);
    engine_.ledger().count(res.delivered ? "blocks_delivered" : "blocks_missed");
    BlockRow row;
    row.time_us = engine_.now();
    row.block = next_block_id_++;
    row.purpose = purpose;
    row.mode = plan.mode;
    row.k = plan.k;
    row.redundancy = plan.fec_redundancy;
    row.result = res;
    report_.blocks.push_back(row);
    return report_.blocks.back();
}

void Simulation::boot() {
    Ledger& led = engine_.ledger();

    // motion trace start
    if (!scn_.motion.empty() && scn_.motion.front().time_us == 0) {
        const auto& m = scn_.motion.front();
        user_pose_ = {m.position, quat_from_yaw(m.yaw_deg * kPi / 180.0)};
    }

    for (const auto& a : scn_.apps) {
        world_.register_app(a.id, a.private_clearance);
        AppProcess proc;
        proc.id = a.id;
        proc.demand_us = a.demand_us;
        proc.mode = scn_.mode;
        proc.state = AppState::Running;
        sched_.register_app(proc);
    }
    if (!scn_.apps.empty()) focused_app_ = scn_.apps.front().id;
    if (scn_.mode == ExecMode::IsolatedModel) {
        // exactly one focused app runs at a time
        for (const auto& a : scn_.apps) {
            if (a.id != focused_app_) sched_.find(a.id)->state = AppState::Background;
        }
    }

    if (!scn_.persist_load.empty()) {
        std::ifstream in(scn_.persist_load);
        if (!in) throw SimError("cannot open persisted world model: " + scn_.persist_load);
        WorldModel persisted = WorldModel::load(in, scn_.grid_cell_m);
        auto elems = persisted.all_elements();
        std::vector<std::vector<WorldElement>> sets{elems};
        world_.merge_remote(sets, &led);
    }

    // Boot mapping pass: the device observes the full surroundings once; all
    // later frames are range-limited re-observations.
    {
        SensorFrame frame;
        frame.context = context_;
        for (const auto& b : scn_.bystander_events)
            if (b.start_us <= 0 && 0 < b.end_us) frame.bystander_regions.push_back(b.region);
        for (const auto& e : scn_.world) {
            WorldElement obs = e;
            obs.timestamp = 0;
            obs.source = "local";
            frame.elements.push_back(obs);
        }
        SensorFrame clean = filter_input(frame, policy_, 0, &led, &report_.audit);
        led.charge_energy("privacy", EnergyKind::Compute, scn_.compute_mj);
        led.charge_energy("privacy", EnergyKind::Message, scn_.message_mj);
        world_.ingest_sensor_frame(clean.elements, 0, &led);
        led.charge_energy("world_model", EnergyKind::Compute, scn_.compute_mj);
        led.charge_energy("world_model", EnergyKind::Message, scn_.message_mj);
    }

    for (const auto& [app, region] : scn_.leases) {
        auto res = world_.acquire_lease(app, region, LeaseMode::Write, 0);
        if (std::holds_alternative<LeaseDenied>(res)) led.count("lease_denied");
    }
    for (const auto& p : scn_.placements) {
        bool covered = false;
        for (const auto& l : world_.leases())
            if (l.app == p.app && l.mode == LeaseMode::Write && l.region.contains(p.bounds))
                covered = true;
        if (!covered) {
            auto res = world_.acquire_lease(p.app, p.bounds, LeaseMode::Write, 0);
            if (std::holds_alternative<LeaseDenied>(res)) led.count("lease_denied");
        }
        try {
            PlaceResult placed = world_.place_content(p.app, p);
            switch (placed.outcome) {
                case PlaceOutcome::Placed: led.count("placements_placed"); break;
                case PlaceOutcome::Relocated: led.count("placements_relocated"); break;
                case PlaceOutcome::Rejected: led.count("placements_rejected"); break;
            }
        } catch (const NoLeaseError&) {
            led.count("placements_no_lease");
        } catch (const SimError&) {
            led.count("placements_failed");
        }
    }

    if (!cell_.empty()) discover(session_, cell_, servers_in_cell(cell_));

    // deterministic pending queues, stable within equal times
    std::stable_sort(scn_.switches.begin(), scn_.switches.end(),
                     [](const auto& a, const auto& b) { return a.time_us < b.time_us; });
    std::stable_sort(scn_.tasks.begin(), scn_.tasks.end(),
                     [](const auto& a, const auto& b) { return a.time_us < b.time_us; });
    std::stable_sort(scn_.remote_merges.begin(), scn_.remote_merges.end(),
                     [](const auto& a, const auto& b) { return a.time_us < b.time_us; });

    engine_.schedule(0, EventKind::FrameTick, FrameTickPayload{0});
    if (scn_.sensor_period_us <= scn_.duration_us)
        engine_.schedule(scn_.sensor_period_us, EventKind::SensorFrame, SensorFramePayload{1});
    for (size_t i = 0; i < scn_.motion.size(); ++i) {
        const auto& m = scn_.motion[i];
        if (m.time_us == 0 || m.time_us > scn_.duration_us) continue;
        UserMovedPayload um;
        um.has_motion = true;
        um.pose = {m.position, quat_from_yaw(m.yaw_deg * kPi / 180.0)};
        if (i > 0) {
            const auto& prev = scn_.motion[i - 1];
            double dt_s = (m.time_us - prev.time_us) / 1e6;
            um.speed_mps = length(m.position - prev.position) / dt_s;
            um.angular_speed_rad_s = std::abs(m.yaw_deg - prev.yaw_deg) * kPi / 180.0 / dt_s;
        }
        engine_.schedule(m.time_us, EventKind::UserMoved, um);
    }
    for (const auto& ev : scn_.input_events) {
        if (ev.time_us > scn_.duration_us) continue;
        UserMovedPayload um;
        um.has_action_ray = true;
        um.action_ray = ev.ray;
        engine_.schedule(ev.time_us, EventKind::UserMoved, um);
    }
    for (const auto& cc : scn_.contexts) {
        if (cc.time_us > scn_.duration_us) continue;
        engine_.schedule(cc.time_us, EventKind::PolicyChanged, PolicyChangedPayload{cc.context});
    }
    for (const auto& cc : scn_.crossings) {
        if (cc.time_us > scn_.duration_us) continue;
        engine_.schedule(cc.time_us, EventKind::HandoverTriggered,
                         HandoverTriggeredPayload{cc.cell});
    }
}

void Simulation::on_event(const SimEvent& ev) {
    switch (ev.kind) {
        case EventKind::FrameTick: on_frame_tick(std::get<FrameTickPayload>(ev.payload)); break;
        case EventKind::SensorFrame: on_sensor_frame(std::get<SensorFramePayload>(ev.payload)); break;
        case EventKind::TaskDone: on_task_done(std::get<TaskDonePayload>(ev.payload)); break;
        case EventKind::PacketArrival:
            on_packet_arrival(std::get<PacketArrivalPayload>(ev.payload));
            break;
        case EventKind::UserMoved: on_user_moved(std::get<UserMovedPayload>(ev.payload)); break;
        case EventKind::PolicyChanged:
            on_policy_changed(std::get<PolicyChangedPayload>(ev.payload));
            break;
        case EventKind::HandoverTriggered:
            on_handover(std::get<HandoverTriggeredPayload>(ev.payload));
            break;
    }
}

void Simulation::process_pending_switches() {
    SimTime now = engine_.now();
    while (next_switch_ < scn_.switches.size() && scn_.switches[next_switch_].time_us <= now) {
        const auto& sw = scn_.switches[next_switch_++];
        auto targets = world_.placements_of(sw.to);
        Frustum fr = current_frustum();
        bool in_view = false;
        for (const auto& p : targets)
            if (aabb_intersects_frustum(p.bounds, fr)) in_view = true;
        MotionCondition cond =
            user_speed_mps_ > 1e-9 ? MotionCondition::Moving : MotionCondition::Static;
        int64_t cost = sched_.context_switch(sw.from, sw.to, cond, in_view, targets.size(),
                                             interframe_us(scn_), now,
                                             engine_.rng().stream("scheduler"), engine_.ledger());
        engine_.ledger().sample("switch_cost_us", now, static_cast<double>(cost));
        if (scn_.mode == ExecMode::IsolatedModel) {
            if (auto* from = sched_.find(sw.from)) from->state = AppState::Background;
            if (auto* to = sched_.find(sw.to)) to->state = AppState::Running;
        }
        focused_app_ = sw.to;
    }
}

void Simulation::process_pending_tasks() {
    SimTime now = engine_.now();
    while (next_task_ < scn_.tasks.size() && scn_.tasks[next_task_].time_us <= now) {
        submit_task(scn_.tasks[next_task_++]);
    }
}

void Simulation::process_pending_merges() {
    SimTime now = engine_.now();
    while (next_merge_ < scn_.remote_merges.size() &&
           scn_.remote_merges[next_merge_].time_us <= now) {
        do_remote_merge(scn_.remote_merges[next_merge_++]);
    }
}

void Simulation::process_taint_injection() {
    if (taint_injected_ || !scn_.inject_taint_at_us) return;
    if (*scn_.inject_taint_at_us > engine_.now()) return;
    taint_injected_ = true;
    WorldElement tainted;
    tainted.id = 9'999'999;
    tainted.kind = ElementKind::FeaturePoint;
    tainted.pose.position = user_pose_.position;
    tainted.extent = {user_pose_.position, user_pose_.position};
    tainted.source = "injected";
    tainted.timestamp = engine_.now();
    tainted.tag = Sensitivity::Bystander;
    std::vector<WorldElement> frame{tainted};
    world_.ingest_sensor_frame(frame, engine_.now(), &engine_.ledger());  // must throw
}

void Simulation::on_frame_tick(const FrameTickPayload& tick) {
    SimTime now = engine_.now();
    Ledger& led = engine_.ledger();

    process_pending_switches();
    process_pending_tasks();
    process_pending_merges();
    process_taint_injection();

    Frustum fr = current_frustum();
    for (const auto& [id, _] : sched_.table()) {
        auto placements = world_.placements_of(id);
        sched_.update_fov(id, classify_fov(placements, fr, scn_.sched.d_near_m));
        if (auto* app = sched_.find(id); app->recovery_until && *app->recovery_until <= now)
            app->recovery_until.reset();  // tracking re-established
    }

    FrameBudget budget{interframe_us(scn_), 0};
    auto grants = sched_.schedule_frame(budget, led);
    led.charge_energy("scheduler", EnergyKind::Compute, scn_.compute_mj);
    led.charge_energy("scheduler", EnergyKind::Message, scn_.message_mj);
    led.count("frames_rendered");

    int64_t mtp = scn_.display_base_latency_us + budget.spent_us;
    last_mtp_us_ = mtp;
    led.sample("motion_to_photon_us", now, static_cast<double>(mtp));
    led.add_time("motion_to_photon_total", mtp);

    // display pipeline: selection then output policy
    std::vector<ContentPlacement> candidates;
    for (const auto& p : world_.placements()) {
        const AppProcess* app = sched_.find(p.app);
        if (!app) continue;
        if (scn_.mode == ExecMode::IsolatedModel && p.app != focused_app_) continue;
        if (app->recovery_until && *app->recovery_until > now) continue;  // tracking lost
        candidates.push_back(p);
    }
    auto selected = select_visible(candidates, fr, scn_.display, scn_.coverage_grid);
    led.charge_energy("display", EnergyKind::Compute, scn_.compute_mj);
    led.charge_energy("display", EnergyKind::Message, scn_.message_mj);
    auto rendered = filter_output(selected, context_, policy_, now, &led, &report_.audit);
    led.charge_energy("privacy", EnergyKind::Compute, scn_.compute_mj);
    for (const auto& p : rendered) {
        report_.render_log.push_back({tick.frame_index, p.app, p.placement_id, p.relevance});
    }
    led.count("items_rendered", rendered.size());

    if (!scn_.quality_ladder.empty()) {
        LinkState link = session_.server ? link_for_server(*session_.server) : access_link();
        led.sample("bitrate_bps", now, adapt_rate(link, scn_.quality_ladder));
    }

    SimTime next = now + interframe_us(scn_);
    if (next <= scn_.duration_us)
        engine_.schedule(next, EventKind::FrameTick, FrameTickPayload{tick.frame_index + 1});
}

void Simulation::on_sensor_frame(const SensorFramePayload& sf) {
    SimTime now = engine_.now();
    Ledger& led = engine_.ledger();

    SensorFrame frame;
    frame.context = context_;
    for (const auto& b : scn_.bystander_events)
        if (b.start_us <= now && now < b.end_us) frame.bystander_regions.push_back(b.region);
    for (const auto& e : scn_.world) {
        if (distance(e.extent, user_pose_.position) > scn_.sensor_range_m) continue;
        WorldElement obs = e;
        obs.timestamp = now;
        obs.source = "local";
        frame.elements.push_back(obs);
    }
    SensorFrame clean = filter_input(frame, policy_, now, &led, &report_.audit);
    led.charge_energy("privacy", EnergyKind::Compute, scn_.compute_mj);
    led.charge_energy("privacy", EnergyKind::Message, scn_.message_mj);
    world_.ingest_sensor_frame(clean.elements, now, &led);
    led.charge_energy("world_model", EnergyKind::Compute, scn_.compute_mj);
    led.charge_energy("world_model", EnergyKind::Message, scn_.message_mj);
    led.count("sensor_frames");

    SimTime next = now + scn_.sensor_period_us;
    if (next <= scn_.duration_us)
        engine_.schedule(next, EventKind::SensorFrame, SensorFramePayload{sf.frame_id + 1});
}

void Simulation::on_user_moved(const UserMovedPayload& um) {
    if (um.has_motion) {
        user_pose_ = um.pose;
        user_speed_mps_ = um.speed_mps;
        user_angular_speed_ = um.angular_speed_rad_s;
    }
    if (um.has_action_ray) route_user_action(um.action_ray);
}

void Simulation::route_user_action(const Ray& ray) {
    Ledger& led = engine_.ledger();
    double enlarged = enlarge_target(scn_.base_target_radius_m, user_angular_speed_, last_mtp_us_,
                                     scn_.arm_length_m);
    double delta = enlarged - scn_.base_target_radius_m;

    std::vector<IoCandidate> candidates;
    for (const auto& role : scn_.io_roles) {
        const WorldElement* e = world_.find(role.element);
        if (!e) continue;
        IoCandidate c;
        c.element = role.element;
        c.zone = classify_zone(e->pose.position, user_pose_.position, scn_.zones);
        c.input_role = role.input;
        c.output_role = role.output;
        c.bounds = {e->extent.lo - Vec3{delta, delta, delta}, e->extent.hi + Vec3{delta, delta, delta}};
        candidates.push_back(c);
    }
    led.charge_energy("interaction", EnergyKind::Compute, scn_.compute_mj);
    led.charge_energy("interaction", EnergyKind::Message, scn_.message_mj);
    auto hit = route_input(ray, candidates);
    if (!hit) {
        led.count("input_misses");
        return;
    }
    led.count("input_hits");
    for (const auto& p : world_.placements()) {
        if (p.anchor_id == *hit) {
            led.count("input_delivered");
            break;
        }
    }
}

void Simulation::on_policy_changed(const PolicyChangedPayload& pc) {
    context_ = pc.context;
    engine_.ledger().count("policy_changes");
}

void Simulation::on_handover(const HandoverTriggeredPayload& ho) {
    SimTime now = engine_.now();
    Ledger& led = engine_.ledger();
    std::string old_cell = cell_;
    cell_ = ho.new_cell;
    led.charge_energy("offloading", EnergyKind::Compute, scn_.compute_mj);

    if (session_.state != SessionState::Attached) {
        if (session_.state == SessionState::Discovered) {
            session_.user_cell = cell_;
            session_.candidates = servers_in_cell(cell_);
        }
        return;
    }

    std::string old_server = *session_.server;
    HandoverOutcome outcome = handover(session_, ho.new_cell, servers_in_cell(ho.new_cell),
                                       scn_.offload);
    led.count("handovers");
    if (outcome.new_server) {
        led.add_time("migration_total", outcome.migration_latency_us);
    } else {
        led.count("handover_degraded");
    }

    for (auto& [id, task] : tasks_) {
        if (task.done || task.placement.local() || *task.placement.server != old_server) continue;
        ++task.generation;
        if (outcome.new_server) {
            Profile profile = build_profile(task.spec);
            CostResult cost = profile.servers.count(*outcome.new_server)
                                  ? estimate_cost(profile, remote_placement(*outcome.new_server))
                                  : CostResult{Infeasible{"server unreachable"}};
            if (const double* us = std::get_if<double>(&cost)) {
                task.expected_completion =
                    rebind_completion_time(now, task.submit_time, task.expected_completion, *us,
                                           outcome.migration_latency_us);
                task.placement = remote_placement(*outcome.new_server);
                led.count("tasks_rebound");
            } else {
                task.expected_completion =
                    now + static_cast<SimTime>(std::llround(task.spec.exec_us_local /
                                                            scn_.device.cpu_factor));
                task.placement = local_placement();
                led.count("tasks_fallback_local");
            }
        } else {
            // no server in the cell: full local re-execution
            task.expected_completion =
                now + static_cast<SimTime>(
                          std::llround(task.spec.exec_us_local / scn_.device.cpu_factor));
            task.placement = local_placement();
            led.count("tasks_fallback_local");
        }
        engine_.schedule(task.expected_completion, EventKind::TaskDone,
                         TaskDonePayload{id, task.generation});
    }
}

void Simulation::submit_task(const ScenarioTask& st) {
    SimTime now = engine_.now();
    Ledger& led = engine_.ledger();
    uint64_t task_id = tasks_.size() + 1;

    TaskRecord rec;
    rec.id = task_id;
    rec.app = st.app;
    rec.spec = st.spec;
    rec.kind = st.kind;
    rec.target = st.target;
    rec.submit_time = now;
    rec.view_at_submit = inverse(user_pose_);

    Profile profile = build_profile(st.spec);
    led.charge_energy("offloading", EnergyKind::Compute, scn_.compute_mj);

    Placement placement;
    if (!st.pin.empty()) {
        // developer pins are honored absolutely, except the privacy floor:
        // confidential work under a local-only preference never leaves the device
        if (st.pin != "local" && st.spec.confidential &&
            scn_.user_prefs.confidential_tasks_local_only) {
            placement = local_placement();
            led.count("pins_overridden_privacy");
        } else if (st.pin == "local") {
            placement = local_placement();
        } else {
            placement = remote_placement(st.pin);
        }
        CostResult pinned_cost = profile.servers.count(st.pin) || st.pin == "local"
                                     ? estimate_cost(profile, placement)
                                     : CostResult{Infeasible{"pinned server unreachable"}};
        if (std::get_if<Infeasible>(&pinned_cost)) placement = local_placement();
        DecisionRow row;
        row.time_us = now;
        row.task = task_id;
        row.placement = placement.local() ? "local" : *placement.server;
        row.pinned = true;
        row.chosen = true;
        if (const double* us = std::get_if<double>(&pinned_cost)) row.cost_us = *us;
        report_.decisions.push_back(row);
    } else {
        Decision d = decide(profile, scn_.offload);
        placement = d.placement;
        for (const auto& [name, cost] : d.costs) {
            DecisionRow row;
            row.time_us = now;
            row.task = task_id;
            row.placement = name;
            if (const double* us = std::get_if<double>(&cost)) {
                row.cost_us = *us;
            } else {
                row.feasible = false;
                row.infeasible_reason = std::get<Infeasible>(cost).reason;
            }
            row.chosen = (name == "local" && placement.local()) ||
                         (!placement.local() && name == *placement.server);
            report_.decisions.push_back(row);
        }
    }
    rec.placement = placement;

    if (placement.local()) {
        rec.expected_completion =
            now + static_cast<SimTime>(std::llround(st.spec.exec_us_local / scn_.device.cpu_factor));
        led.charge_energy("device_exec", EnergyKind::Compute, scn_.compute_mj);
    } else {
        const std::string& server_id = *placement.server;
        if (session_.state == SessionState::Discovered) {
            const ScenarioServer* sv = server_info(server_id);
            if (sv && !sv->spec.cloud) attach(session_, server_id);
        }
        LinkState link = link_for_server(server_id);
        int64_t slack = st.spec.deadline_us > 0 ? st.spec.deadline_us : kNoDeadline;
        BlockRow up = transmit(st.spec.payload_bytes, link, slack, "task_uplink");
        led.charge_energy("offloading", EnergyKind::Message, scn_.message_mj);

        const ServerSpec& server = profile.servers.at(server_id);
        double exec_us = st.spec.exec_us_local / (server.cpu_factor * (1.0 - server.load));
        BlockRow down = transmit(st.spec.result_bytes, link, slack, "task_downlink");

        if (!up.result.delivered || !down.result.delivered) {
            // transport failed within the deadline budget; re-run on device
            led.count("tasks_transport_fallback");
            rec.placement = local_placement();
            rec.expected_completion =
                now + up.result.delivery_time_us +
                static_cast<SimTime>(std::llround(st.spec.exec_us_local / scn_.device.cpu_factor));
        } else {
            rec.expected_completion = now + up.result.delivery_time_us +
                                      static_cast<SimTime>(std::llround(exec_us)) +
                                      down.result.delivery_time_us;
            engine_.schedule(now + up.result.delivery_time_us, EventKind::PacketArrival,
                             PacketArrivalPayload{up.block, task_id, rec.generation});
        }
    }

    if (rec.kind == TaskKind::Recognition) {
        PendingRecognition pending;
        pending.request_id = next_recog_request_++;
        pending.target = rec.target;
        pending.submitted_at = now;
        pending.pose_at_submit = rec.view_at_submit;
        recognition_.submit(pending);
        rec.recog_request = pending.request_id;
    }
    tasks_[task_id] = rec;
    led.count("tasks_submitted");
    engine_.schedule(rec.expected_completion, EventKind::TaskDone,
                     TaskDonePayload{task_id, rec.generation});
}

void Simulation::on_task_done(const TaskDonePayload& td) {
    auto it = tasks_.find(td.task_id);
    if (it == tasks_.end()) return;
    TaskRecord& task = it->second;
    Ledger& led = engine_.ledger();
    if (task.done || td.generation != task.generation) {
        led.count("task_events_stale");
        return;
    }
    task.done = true;
    led.count("tasks_completed");
    if (task.spec.deadline_us > 0 &&
        task.expected_completion - task.submit_time > task.spec.deadline_us)
        led.count("task_deadline_misses");

    if (task.kind == TaskKind::Recognition) {
        led.charge_energy("interaction", EnergyKind::Message, scn_.message_mj);
        try {
            PendingRecognition pending = recognition_.apply(task.target, task.recog_request);
            const WorldElement* truth = nullptr;
            for (const auto& e : scn_.world)
                if (e.id == task.target) truth = &e;
            if (truth) {
                Pose view_now = inverse(user_pose_);
                Pose result = compose(pending.pose_at_submit, truth->pose);
                Pose adjusted = scn_.compensation
                                    ? compensate_recognition(result, pending.pose_at_submit, view_now)
                                    : result;
                Pose overlay_world = compose(inverse(view_now), adjusted);
                double err = length(overlay_world.position - truth->pose.position);
                led.sample("overlay_error_m", engine_.now(), err);
                led.count("recognitions_applied");
            }
        } catch (const StaleRequestError&) {
            led.count("recognitions_stale");
        }
    }
}

void Simulation::on_packet_arrival(const PacketArrivalPayload& pa) {
    Ledger& led = engine_.ledger();
    led.count("packet_arrivals");
    auto it = pending_merges_.find(pa.block_id);
    if (it == pending_merges_.end()) return;
    std::vector<std::vector<WorldElement>> sets{it->second};
    world_.merge_remote(sets, &led);
    led.charge_energy("world_model", EnergyKind::Compute, scn_.compute_mj);
    led.charge_energy("world_model", EnergyKind::Message, scn_.message_mj);
    led.count("merges_applied");
    pending_merges_.erase(it);
}

void Simulation::do_remote_merge(const RemoteMerge& rm) {
    SimTime now = engine_.now();
    Ledger& led = engine_.ledger();

    // outbound contribution: the device shares its simplified local model
    auto copy = world_.simplified_copy(static_cast<size_t>(scn_.local_copy_budget));
    auto outbound = gate_network_share(copy, policy_, now, &led, &report_.audit);
    for (const auto& e : outbound) report_.shared_out.push_back(e);
    led.charge_energy("privacy", EnergyKind::Compute, scn_.compute_mj);
    led.charge_energy("privacy", EnergyKind::Message, scn_.message_mj);

    LinkState link = session_.server ? link_for_server(*session_.server) : access_link();
    transmit(static_cast<int64_t>(outbound.size()) * scn_.bytes_per_element, link, kNoDeadline,
             "merge_out");

    const auto& incoming = scn_.remote_worlds.at(rm.device);
    BlockRow in = transmit(static_cast<int64_t>(incoming.size()) * scn_.bytes_per_element, link,
                           kNoDeadline, "merge_in");
    pending_merges_[in.block] = incoming;
    engine_.schedule(now + in.result.delivery_time_us, EventKind::PacketArrival,
                     PacketArrivalPayload{in.block, 0, 0});
}

RunReport Simulation::run() {
    try {
        boot();
        engine_.run_until(scn_.duration_us);
        report_.exit_code = 0;
    } catch (const TaintViolation& e) {
        report_.exit_code = 2;
        report_.taint_violation = true;
        report_.violation = std::string("TaintViolation: ") + e.what();
    } catch (const SimError& e) {
        report_.exit_code = 3;
        report_.violation = e.what();
    }

    if (report_.exit_code == 0 && !scn_.persist_save.empty()) {
        std::ofstream out(scn_.persist_save);
        if (out) {
            world_.save(out);
        } else {
            report_.exit_code = 4;
            report_.violation = "cannot write persisted world model: " + scn_.persist_save;
        }
    }

    report_.ledger = engine_.ledger();
    report_.trace = engine_.trace();
    report_.events_scheduled = engine_.scheduled_total();
    report_.final_store = world_.all_elements();
    report_.clock_us = engine_.now();
    return report_;
}

void write_outputs(const RunReport& report, const std::string& out_dir, bool render_log) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    auto path = [&](const std::string& name) { return (fs::path(out_dir) / name).string(); };

    {
        std::ofstream os(path("ledger.txt"));
        if (!os) throw SimError("cannot write " + path("ledger.txt"));
        report.ledger.write_flat(os);
        os << "run.clock_us = " << report.clock_us << "\n";
        os << "run.exit_code = " << report.exit_code << "\n";
        os << "run.violation = " << (report.violation.empty() ? "-" : report.violation) << "\n";
    }
    for (const auto& [name, series] : report.ledger.series()) {
        std::ofstream os(path("series_" + name + ".csv"));
        os << "time_us,value\n";
        for (const auto& [t, v] : series) os << t << ',' << fmt(v) << "\n";
    }
    {
        std::ofstream os(path("decisions.csv"));
        os << "time_us,task,placement,cost_us,feasible,reason,chosen,pinned\n";
        for (const auto& d : report.decisions)
            os << d.time_us << ',' << d.task << ',' << d.placement << ',' << fmt(d.cost_us) << ','
               << (d.feasible ? 1 : 0) << ',' << (d.infeasible_reason.empty() ? "-" : d.infeasible_reason)
               << ',' << (d.chosen ? 1 : 0) << ',' << (d.pinned ? 1 : 0) << "\n";
    }
    {
        std::ofstream os(path("blocks.csv"));
        os << "time_us,block,purpose,mode,k,redundancy,data_packets,parity_packets,"
              "retransmitted,lost,nack_rounds,bytes_sent,delivery_time_us,delivered\n";
        for (const auto& b : report.blocks)
            os << b.time_us << ',' << b.block << ',' << b.purpose << ',' << to_string(b.mode) << ','
               << b.k << ',' << b.redundancy << ',' << b.result.data_packets << ','
               << b.result.parity_packets << ',' << b.result.retransmitted_packets << ','
               << b.result.lost_packets << ',' << b.result.nack_rounds << ',' << b.result.bytes_sent
               << ',' << b.result.delivery_time_us << ',' << (b.result.delivered ? 1 : 0) << "\n";
    }
    {
        std::ofstream os(path("privacy_audit.csv"));
        os << "time_us,stage,action,id\n";
        for (const auto& row : report.audit.rows)
            os << row.time << ',' << row.stage << ',' << row.action << ',' << row.id << "\n";
    }
    if (render_log) {
        std::ofstream os(path("render_log.csv"));
        os << "frame,app,placement,relevance\n";
        for (const auto& r : report.render_log)
            os << r.frame << ',' << r.app << ',' << r.placement << ',' << fmt(r.relevance) << "\n";
    }
}

}  // namespace xros
