#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <queue>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "xros/geometry.hpp"
#include "xros/rng.hpp"

namespace xros {

// Virtual time in integer microseconds.
using SimTime = int64_t;

constexpr SimTime kInterframe60Us = 16667;
constexpr SimTime kInterframe30Us = 33333;

struct SimError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PastEventError : SimError {
    using SimError::SimError;
};
// Bystander-tagged data crossed the privacy barrier: pipeline bug, fail the run.
struct TaintViolation : SimError {
    using SimError::SimError;
};
struct UnknownAppError : SimError {
    using SimError::SimError;
};
struct UnknownServerError : SimError {
    using SimError::SimError;
};
struct InvalidStateError : SimError {
    using SimError::SimError;
};
struct NoLeaseError : SimError {
    using SimError::SimError;
};
struct StaleRequestError : SimError {
    using SimError::SimError;
};

enum class EventKind {
    SensorFrame,
    FrameTick,
    TaskDone,
    PacketArrival,
    UserMoved,
    PolicyChanged,
    HandoverTriggered,
};

const char* to_string(EventKind k);

struct SensorFramePayload {
    uint64_t frame_id = 0;
};
struct FrameTickPayload {
    uint64_t frame_index = 0;
};
struct TaskDonePayload {
    uint64_t task_id = 0;
    uint64_t generation = 0;  // stale completions carry an old generation
};
struct PacketArrivalPayload {
    uint64_t block_id = 0;
    uint64_t task_id = 0;
    uint64_t generation = 0;
};
struct UserMovedPayload {
    bool has_motion = false;  // motion-trace sample
    Pose pose;
    double speed_mps = 0.0;
    double angular_speed_rad_s = 0.0;
    bool has_action_ray = false;  // user-action trace rows ride on motion events
    Ray action_ray;
};
struct PolicyChangedPayload {
    std::string context;
};
struct HandoverTriggeredPayload {
    std::string new_cell;
};

using EventPayload = std::variant<SensorFramePayload, FrameTickPayload, TaskDonePayload,
                                  PacketArrivalPayload, UserMovedPayload, PolicyChangedPayload,
                                  HandoverTriggeredPayload>;

struct SimEvent {
    SimTime time = 0;
    EventKind kind = EventKind::FrameTick;
    EventPayload payload;
    uint64_t seq = 0;  // monotone tiebreak, unique per run
};

enum class EnergyKind { Compute, Radio, Message };

// Run-wide metrics: monotone counters, duration accumulators, per-module energy
// and timestamped series. Equality compares everything, which is what the
// determinism contract tests.
class Ledger {
public:
    void count(const std::string& name, uint64_t n = 1) { counters_[name] += n; }
    void add_time(const std::string& name, SimTime us);
    void charge_energy(const std::string& module, EnergyKind kind, double mj);
    void sample(const std::string& series, SimTime t, double value);

    uint64_t counter(const std::string& name) const;
    SimTime timer(const std::string& name) const;
    double energy(const std::string& module) const;
    double energy_by_kind(EnergyKind kind) const { return energy_kind_[static_cast<int>(kind)]; }
    double total_energy() const;
    // Radio + Message: the communication subtotal the energy model minimizes.
    double comm_energy() const {
        return energy_kind_[static_cast<int>(EnergyKind::Radio)] +
               energy_kind_[static_cast<int>(EnergyKind::Message)];
    }

    const std::map<std::string, uint64_t>& counters() const { return counters_; }
    const std::map<std::string, SimTime>& timers() const { return timers_; }
    const std::map<std::string, double>& energy_by_module() const { return energy_mj_; }
    const std::map<std::string, std::vector<std::pair<SimTime, double>>>& series() const {
        return series_;
    }

    // Flat key/value dump, deterministic order and formatting.
    void write_flat(std::ostream& os) const;

    bool operator==(const Ledger& o) const = default;

private:
    std::map<std::string, uint64_t> counters_;
    std::map<std::string, SimTime> timers_;
    std::map<std::string, double> energy_mj_;
    double energy_kind_[3] = {0.0, 0.0, 0.0};
    std::map<std::string, std::vector<std::pair<SimTime, double>>> series_;
};

// Deterministic single-threaded event loop. Events are totally ordered by
// (time, seq); the processed-event trace is kept for ordering and conservation
// checks.
class Engine {
public:
    explicit Engine(uint64_t seed) : rng_(seed) {}

    SimTime now() const { return now_; }
    Ledger& ledger() { return ledger_; }
    const Ledger& ledger() const { return ledger_; }
    RngSet& rng() { return rng_; }

    uint64_t schedule(SimTime t, EventKind kind, EventPayload payload);

    void set_handler(std::function<void(const SimEvent&)> h) { handler_ = std::move(h); }

    // Processes every event with time <= t_end in (time, seq) order, then
    // advances the clock to t_end. An empty queue is a valid (vacuous) run.
    Ledger& run_until(SimTime t_end);

    size_t pending() const { return queue_.size(); }
    uint64_t scheduled_total() const { return next_seq_; }
    const std::vector<SimEvent>& trace() const { return trace_; }

private:
    struct Later {
        bool operator()(const SimEvent& a, const SimEvent& b) const {
            if (a.time != b.time) return a.time > b.time;
            return a.seq > b.seq;
        }
    };

    SimTime now_ = 0;
    uint64_t next_seq_ = 0;
    std::priority_queue<SimEvent, std::vector<SimEvent>, Later> queue_;
    std::function<void(const SimEvent&)> handler_;
    Ledger ledger_;
    RngSet rng_;
    std::vector<SimEvent> trace_;
};

}  // namespace xros
