#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "xros/rng.hpp"
#include "xros/sim_core.hpp"

namespace xros {

struct LinkState {
    int64_t latency_us = 10'000;  // one-way propagation
    double bandwidth_bps = 50e6;
    double loss_p = 0.0;  // independent per-packet loss, [0, 1)
    int64_t jitter_us = 0;  // uniform +/- bound per packet
};

enum class RecoveryMode { NackOnly, Hybrid, FecOnly };

const char* to_string(RecoveryMode m);

struct RecoveryPlan {
    RecoveryMode mode = RecoveryMode::NackOnly;
    int fec_redundancy = 0;  // parity packets per k data packets
    int k = 1;               // block size in data packets
};

constexpr int64_t kPacketBytes = 1200;

// Picks the recovery technique from current conditions: lossless links need no
// parity; when a retransmission round-trip fits the deadline slack, light FEC
// plus NACK; otherwise FEC alone, provisioned for the expected losses plus
// retransmission-of-retransmission mass.
RecoveryPlan plan_recovery(const LinkState& link, int64_t deadline_slack_us, int k);

struct TransmitResult {
    bool delivered = false;
    SimTime delivery_time_us = 0;  // relative to transmission start
    int64_t data_packets = 0;
    int64_t parity_packets = 0;
    int64_t retransmitted_packets = 0;
    int64_t bytes_sent = 0;  // data + parity + retransmissions
    int64_t lost_packets = 0;
    int nack_rounds = 0;
};

// Sends a payload as 1200-byte packets in FEC blocks of k data packets.
// Packet losses draw from the given stream; each block recovers up to
// fec_redundancy losses instantly, residual losses cost one RTT NACK round
// each (unless FecOnly). Missed when nothing recoverable by the deadline.
TransmitResult transmit_block(int64_t payload_bytes, const LinkState& link,
                              const RecoveryPlan& plan, int64_t deadline_us, RngStream& rng);

// Highest ladder entry fitting within 80% of link bandwidth; the lowest entry
// when none fit. Ladder must be non-empty and sorted ascending.
double adapt_rate(const LinkState& link, std::span<const double> quality_ladder_bps);

}  // namespace xros
