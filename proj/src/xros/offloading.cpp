#include "xros/offloading.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xros {

const char* to_string(NetType t) {
    switch (t) {
        case NetType::ThreeG: return "3g";
        case NetType::Lte: return "lte";
        case NetType::WiFi: return "wifi";
        case NetType::FiveG: return "5g";
    }
    return "?";
}

std::optional<NetType> net_type_from(std::string_view s) {
    if (s == "3g") return NetType::ThreeG;
    if (s == "lte") return NetType::Lte;
    if (s == "wifi") return NetType::WiFi;
    if (s == "5g") return NetType::FiveG;
    return std::nullopt;
}

const char* to_string(SessionState s) {
    switch (s) {
        case SessionState::Undiscovered: return "undiscovered";
        case SessionState::Discovered: return "discovered";
        case SessionState::Attached: return "attached";
        case SessionState::Migrating: return "migrating";
    }
    return "?";
}

CostResult estimate_cost(const Profile& profile, const Placement& placement) {
    const TaskSpec& task = profile.task;
    if (placement.local()) {
        return static_cast<double>(task.exec_us_local) / profile.device.cpu_factor;
    }
    auto it = profile.servers.find(*placement.server);
    if (it == profile.servers.end()) throw UnknownServerError("unknown server " + *placement.server);
    const ServerSpec& server = it->second;

    if (task.confidential && profile.user.confidential_tasks_local_only)
        return Infeasible{"confidential task pinned local by user preference"};
    if (!server.cloud && task.payload_bytes > server.mem_free_bytes)
        return Infeasible{"payload exceeds server memory"};
    if (server.load >= 1.0) return Infeasible{"server saturated"};

    const NetworkSpec& net = server.link ? *server.link : profile.network;
    double uplink_us = task.payload_bytes * 8.0 / net.bandwidth_bps * 1e6;
    double downlink_us = task.result_bytes * 8.0 / net.bandwidth_bps * 1e6;
    double exec_us = task.exec_us_local / (server.cpu_factor * (1.0 - server.load));
    return uplink_us + net.latency_us + exec_us + downlink_us + net.latency_us;
}

Decision decide(const Profile& profile, const OffloadingConfig& cfg) {
    Decision d;
    d.costs.emplace_back("local", estimate_cost(profile, local_placement()));
    for (const auto& [id, _] : profile.servers)
        d.costs.emplace_back(id, estimate_cost(profile, remote_placement(id)));

    bool battery_low = profile.device.battery_frac < cfg.battery_low_threshold;
    double best = std::numeric_limits<double>::infinity();
    Placement best_placement = local_placement();
    bool found = false;
    for (const auto& [name, cost] : d.costs) {
        const double* us = std::get_if<double>(&cost);
        if (!us) continue;
        double compare = *us;
        if (name != "local" && battery_low) compare *= cfg.battery_remote_bias;
        // strict '<' keeps the tie rule: local is evaluated first, servers in
        // lexicographic order after it
        if (!found || compare < best) {
            best = compare;
            best_placement = name == "local" ? local_placement() : remote_placement(name);
            found = true;
        }
    }
    d.placement = best_placement;
    return d;
}

void discover(EdgeSession& session, const std::string& cell, std::vector<std::string> cell_servers) {
    if (session.state != SessionState::Undiscovered)
        throw InvalidStateError("discover requires an Undiscovered session");
    std::sort(cell_servers.begin(), cell_servers.end());
    session.state = SessionState::Discovered;
    session.user_cell = cell;
    session.candidates = std::move(cell_servers);
}

void attach(EdgeSession& session, const std::string& server) {
    if (session.state != SessionState::Discovered)
        throw InvalidStateError("attach requires a Discovered session");
    session.state = SessionState::Attached;
    session.server = server;
}

HandoverOutcome handover(EdgeSession& session, const std::string& new_cell,
                         std::vector<std::string> cell_servers, const OffloadingConfig& cfg) {
    if (session.state != SessionState::Attached)
        throw InvalidStateError("handover requires an Attached session");
    if (session.user_cell && *session.user_cell == new_cell)
        throw InvalidStateError("handover requires a different cell");

    session.state = SessionState::Migrating;
    session.user_cell = new_cell;
    std::sort(cell_servers.begin(), cell_servers.end());
    session.candidates = cell_servers;

    if (cell_servers.empty()) {
        session.state = SessionState::Discovered;
        session.server.reset();
        return {std::nullopt, 0};
    }
    session.server = cell_servers.front();
    session.state = SessionState::Attached;
    return {session.server, cfg.migration_latency_us};
}

SimTime rebind_completion_time(SimTime now, SimTime submitted_at, SimTime old_completion,
                               double new_total_duration_us, int64_t migration_latency_us) {
    double total = static_cast<double>(old_completion - submitted_at);
    double done = static_cast<double>(now - submitted_at);
    double frac_done = total > 0.0 ? std::clamp(done / total, 0.0, 1.0) : 1.0;
    double remaining = (1.0 - frac_done) * new_total_duration_us;
    return now + migration_latency_us + static_cast<SimTime>(std::llround(remaining));
}

}  // namespace xros
