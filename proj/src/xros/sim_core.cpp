#include "xros/sim_core.hpp"

#include <cstdio>
#include <ostream>

namespace xros {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::SensorFrame: return "SensorFrame";
        case EventKind::FrameTick: return "FrameTick";
        case EventKind::TaskDone: return "TaskDone";
        case EventKind::PacketArrival: return "PacketArrival";
        case EventKind::UserMoved: return "UserMoved";
        case EventKind::PolicyChanged: return "PolicyChanged";
        case EventKind::HandoverTriggered: return "HandoverTriggered";
    }
    return "?";
}

void Ledger::add_time(const std::string& name, SimTime us) {
    if (us < 0) throw SimError("negative duration for timer " + name);
    timers_[name] += us;
}

void Ledger::charge_energy(const std::string& module, EnergyKind kind, double mj) {
    if (mj < 0.0) throw SimError("negative energy charge for " + module);
    energy_mj_[module] += mj;
    energy_kind_[static_cast<int>(kind)] += mj;
}

void Ledger::sample(const std::string& series, SimTime t, double value) {
    auto& s = series_[series];
    if (!s.empty() && t < s.back().first)
        throw SimError("series " + series + " timestamps must be non-decreasing");
    s.emplace_back(t, value);
}

uint64_t Ledger::counter(const std::string& name) const {
    auto it = counters_.find(name);
    return it == counters_.end() ? 0 : it->second;
}

SimTime Ledger::timer(const std::string& name) const {
    auto it = timers_.find(name);
    return it == timers_.end() ? 0 : it->second;
}

double Ledger::energy(const std::string& module) const {
    auto it = energy_mj_.find(module);
    return it == energy_mj_.end() ? 0.0 : it->second;
}

double Ledger::total_energy() const {
    double t = 0.0;
    for (const auto& [_, v] : energy_mj_) t += v;
    return t;
}

namespace {
std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}
}  // namespace

void Ledger::write_flat(std::ostream& os) const {
    for (const auto& [k, v] : counters_) os << "counters." << k << " = " << v << "\n";
    for (const auto& [k, v] : timers_) os << "timers." << k << "_us = " << v << "\n";
    for (const auto& [k, v] : energy_mj_) os << "energy.module." << k << " = " << fmt_double(v) << "\n";
    os << "energy.kind.compute = " << fmt_double(energy_kind_[0]) << "\n";
    os << "energy.kind.radio = " << fmt_double(energy_kind_[1]) << "\n";
    os << "energy.kind.message = " << fmt_double(energy_kind_[2]) << "\n";
    os << "energy.comm_subtotal = " << fmt_double(comm_energy()) << "\n";
    os << "energy.total = " << fmt_double(total_energy()) << "\n";
}

uint64_t Engine::schedule(SimTime t, EventKind kind, EventPayload payload) {
    if (t < now_)
        throw PastEventError("event scheduled in the past: t=" + std::to_string(t) +
                             " now=" + std::to_string(now_));
    SimEvent ev{t, kind, std::move(payload), next_seq_++};
    uint64_t seq = ev.seq;
    queue_.push(std::move(ev));
    return seq;
}

Ledger& Engine::run_until(SimTime t_end) {
    if (t_end < now_) throw PastEventError("run_until target precedes the clock");
    while (!queue_.empty() && queue_.top().time <= t_end) {
        SimEvent ev = queue_.top();
        queue_.pop();
        now_ = ev.time;
        trace_.push_back(ev);
        if (handler_) handler_(ev);
    }
    now_ = t_end;
    return ledger_;
}

}  // namespace xros
