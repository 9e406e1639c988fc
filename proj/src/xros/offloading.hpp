#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "xros/sim_core.hpp"

namespace xros {

enum class NetType { ThreeG, Lte, WiFi, FiveG };

const char* to_string(NetType t);
std::optional<NetType> net_type_from(std::string_view s);

struct NetworkSpec {
    NetType type = NetType::WiFi;
    double bandwidth_bps = 50e6;
    int64_t latency_us = 10'000;  // one-way
};

struct DeviceSpec {
    double cpu_factor = 1.0;
    double battery_frac = 1.0;
    int64_t storage_free_bytes = 10'000'000'000;
    int64_t mem_free_bytes = 4'000'000'000;
};

struct UserPrefs {
    bool confidential_tasks_local_only = true;
    bool data_share_ok = true;
};

struct TaskSpec {
    int64_t exec_us_local = 1;  // execution time at cpu_factor 1
    int64_t payload_bytes = 0;
    int64_t result_bytes = 0;
    int64_t deadline_us = 0;  // relative to submission; 0 = none
    bool confidential = false;
};

struct ServerSpec {
    double cpu_factor = 1.0;
    double load = 0.0;  // [0, 1)
    int64_t mem_free_bytes = 8'000'000'000;
    bool cloud = false;  // cloud: higher-latency path, unbounded memory
    std::optional<NetworkSpec> link;  // path override; defaults to profile.network
};

// The five offloading parameter categories gathered by the Profiler.
struct Profile {
    NetworkSpec network;
    DeviceSpec device;
    UserPrefs user;
    TaskSpec task;
    std::map<std::string, ServerSpec> servers;
};

// Local execution or a named server (cloud servers are just servers).
struct Placement {
    std::optional<std::string> server;  // nullopt = Local

    bool local() const { return !server.has_value(); }
    bool operator==(const Placement& o) const = default;
};

inline Placement local_placement() { return {}; }
inline Placement remote_placement(std::string server) { return {std::move(server)}; }

struct Infeasible {
    std::string reason;
};

using CostResult = std::variant<double, Infeasible>;  // completion time in µs

struct OffloadingConfig {
    double battery_low_threshold = 0.2;
    double battery_remote_bias = 0.8;  // remote costs scaled by this below the threshold
    int64_t migration_latency_us = 50'000;
};

// Completion-time estimate for one placement: local scales execution by the
// device factor; remote adds both transfer directions, two propagation
// latencies and server-side execution scaled by capacity and load.
CostResult estimate_cost(const Profile& profile, const Placement& placement);

struct Decision {
    Placement placement;
    // full cost table for the audit log, keyed "local" / server id
    std::vector<std::pair<std::string, CostResult>> costs;
};

// argmin of estimate_cost over Local and every profiled server; ties prefer
// Local, then the lexicographically smallest server id. Below the battery
// threshold remote costs are biased by battery_remote_bias before comparison.
Decision decide(const Profile& profile, const OffloadingConfig& cfg = {});

enum class SessionState { Undiscovered, Discovered, Attached, Migrating };

const char* to_string(SessionState s);

struct EdgeSession {
    SessionState state = SessionState::Undiscovered;
    std::optional<std::string> server;
    std::optional<std::string> user_cell;
    std::vector<std::string> candidates;  // servers cached at discovery
};

// Discovery of edge services in the given cell. Valid only once, from
// Undiscovered; repeated discovery throws InvalidStateError.
void discover(EdgeSession& session, const std::string& cell,
              std::vector<std::string> cell_servers);

void attach(EdgeSession& session, const std::string& server);

struct HandoverOutcome {
    // Empty when the new cell has no server: the session degraded to
    // Discovered and in-flight work falls back to Local with full re-execution.
    std::optional<std::string> new_server;
    int64_t migration_latency_us = 0;
};

// Moves an Attached session to the new cell through the Migrating state.
// Server choice within a cell is deterministic (smallest id).
HandoverOutcome handover(EdgeSession& session, const std::string& new_cell,
                         std::vector<std::string> cell_servers, const OffloadingConfig& cfg);

// Completion-time rebind for an in-flight task: elapsed pipeline progress is
// preserved as a fraction and the remainder replays on the new path after the
// migration latency.
SimTime rebind_completion_time(SimTime now, SimTime submitted_at, SimTime old_completion,
                               double new_total_duration_us, int64_t migration_latency_us);

}  // namespace xros
