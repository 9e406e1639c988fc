#include "xros/network.hpp"

#include <algorithm>
#include <cmath>

namespace xros {

const char* to_string(RecoveryMode m) {
    switch (m) {
        case RecoveryMode::NackOnly: return "nack_only";
        case RecoveryMode::Hybrid: return "hybrid";
        case RecoveryMode::FecOnly: return "fec_only";
    }
    return "?";
}

RecoveryPlan plan_recovery(const LinkState& link, int64_t deadline_slack_us, int k) {
    if (k < 1) throw SimError("plan_recovery requires k >= 1");
    if (link.loss_p >= 1.0) throw SimError("loss_p must be < 1");
    int64_t rtt = 2 * link.latency_us;
    if (link.loss_p == 0.0) return {RecoveryMode::NackOnly, 0, k};
    if (rtt <= deadline_slack_us) {
        int redundancy = static_cast<int>(std::ceil(k * link.loss_p));
        return {RecoveryMode::Hybrid, redundancy, k};
    }
    int redundancy = static_cast<int>(std::ceil(k * link.loss_p / (1.0 - link.loss_p))) + 1;
    return {RecoveryMode::FecOnly, redundancy, k};
}

TransmitResult transmit_block(int64_t payload_bytes, const LinkState& link,
                              const RecoveryPlan& plan, int64_t deadline_us, RngStream& rng) {
    if (plan.mode == RecoveryMode::NackOnly && plan.fec_redundancy != 0)
        throw SimError("NackOnly plan cannot carry FEC redundancy");
    TransmitResult res;
    if (payload_bytes <= 0) {
        res.delivered = link.latency_us <= deadline_us;
        res.delivery_time_us = link.latency_us;
        return res;
    }

    int64_t n_data = (payload_bytes + kPacketBytes - 1) / kPacketBytes;
    int64_t n_blocks = (n_data + plan.k - 1) / plan.k;
    int64_t n_parity = plan.fec_redundancy * n_blocks;
    res.data_packets = n_data;
    res.parity_packets = n_parity;

    int64_t total_packets = n_data + n_parity;
    int64_t total_bytes = total_packets * kPacketBytes;
    res.bytes_sent = total_bytes;

    auto serialize_us = [&](int64_t bytes) {
        return static_cast<int64_t>(std::llround(bytes * 8.0 / link.bandwidth_bps * 1e6));
    };

    // Losses per block; one jitter draw per packet keeps the stream layout
    // fixed regardless of outcome.
    int64_t max_jitter = 0;
    std::vector<int64_t> unrecovered(n_blocks, 0);
    for (int64_t b = 0; b < n_blocks; ++b) {
        int64_t data_in_block = std::min<int64_t>(plan.k, n_data - b * plan.k);
        int64_t lost_data = 0, lost_parity = 0;
        for (int64_t i = 0; i < data_in_block; ++i)
            if (rng.bernoulli(link.loss_p)) ++lost_data;
        for (int64_t i = 0; i < plan.fec_redundancy; ++i)
            if (rng.bernoulli(link.loss_p)) ++lost_parity;
        for (int64_t i = 0; i < data_in_block + plan.fec_redundancy; ++i) {
            int64_t j = link.jitter_us > 0
                            ? static_cast<int64_t>(std::llround(
                                  rng.uniform(-double(link.jitter_us), double(link.jitter_us))))
                            : 0;
            max_jitter = std::max(max_jitter, j);
        }
        res.lost_packets += lost_data + lost_parity;
        int64_t losses = lost_data + lost_parity;
        // erasure property: any k of k+r packets reconstruct the block
        if (losses > plan.fec_redundancy) unrecovered[b] = lost_data;
    }

    SimTime t = serialize_us(total_bytes) + link.latency_us + max_jitter;
    int64_t missing = 0;
    for (int64_t m : unrecovered) missing += m;

    if (missing == 0) {
        res.delivered = t <= deadline_us;
        res.delivery_time_us = t;
        return res;
    }

    if (plan.mode == RecoveryMode::FecOnly) {
        // No retransmission path: the block is unrecoverable.
        res.delivered = false;
        res.delivery_time_us = t;
        return res;
    }

    int64_t rtt = 2 * link.latency_us;
    while (missing > 0) {
        ++res.nack_rounds;
        int64_t resend = missing;
        res.retransmitted_packets += resend;
        res.bytes_sent += resend * kPacketBytes;
        missing = 0;
        for (int64_t i = 0; i < resend; ++i)
            if (rng.bernoulli(link.loss_p)) ++missing;
        res.lost_packets += missing;
        t += rtt + serialize_us(resend * kPacketBytes);
        if (t > deadline_us) {
            res.delivered = false;
            res.delivery_time_us = t;
            return res;
        }
    }
    res.delivered = true;
    res.delivery_time_us = t;
    return res;
}

double adapt_rate(const LinkState& link, std::span<const double> quality_ladder_bps) {
    if (quality_ladder_bps.empty()) throw SimError("adapt_rate requires a non-empty ladder");
    for (size_t i = 1; i < quality_ladder_bps.size(); ++i)
        if (quality_ladder_bps[i] < quality_ladder_bps[i - 1])
            throw SimError("quality ladder must be sorted ascending");
    double headroom = 0.8 * link.bandwidth_bps;
    double chosen = quality_ladder_bps.front();
    for (double level : quality_ladder_bps)
        if (level <= headroom) chosen = level;
    return chosen;
}

}  // namespace xros
