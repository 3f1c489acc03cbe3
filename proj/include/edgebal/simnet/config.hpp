#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace edgebal::simnet {

// Seeded experiment description. The seed fully determines a run: two
// runs of an identical config differ in zero bytes of output.
struct SimConfig {
    int node_count = 5;
    int blocks = 100;
    std::int64_t block_time_ms = 1000;
    std::int64_t delta_st_ms = 500;
    std::int64_t collect_interval_ms = 500;

    std::int64_t app_cpu_min_ppm = 50'000;   // 5 %
    std::int64_t app_cpu_max_ppm = 400'000;  // 40 %
    int app_duration_min_blocks = 10;
    int app_duration_max_blocks = 60;
    std::int64_t arrival_prob_ppm = 300'000;  // per node per block
    std::int64_t admission_threshold_ppm = 900'000;

    std::int64_t latency_min_ms = 5;
    std::int64_t latency_max_ms = 100;

    std::uint64_t seed = 1;
    bool migration_enabled = true;

    // flooded: full DYNT/score gossip on every edge (the protocol).
    // direct: score payloads are delivered origin->peer at the DYNT
    // round-trip latency without per-edge chatter; block distribution is
    // unchanged. Pool dynamics are identical, so large sweeps use it.
    enum class Transport { flooded, direct };
    Transport transport = Transport::flooded;

    // Stress knob: arrivals start immediately on node 0 instead of going
    // through the queue, so only migrations can balance them.
    bool skew_arrivals = false;

    // If > 0, the retry-0 leader of this height dies before producing.
    int crash_leader_at_height = 0;

    void validate() const {
        if (node_count < 1) throw std::invalid_argument("node_count must be >= 1");
        if (blocks < 1) throw std::invalid_argument("blocks must be >= 1");
        if (block_time_ms <= 0 || delta_st_ms <= 0 || collect_interval_ms <= 0)
            throw std::invalid_argument("timing parameters must be positive");
        if (app_cpu_min_ppm < 0 || app_cpu_max_ppm > 10'000'000 ||
            app_cpu_min_ppm > app_cpu_max_ppm)
            throw std::invalid_argument("app cpu range malformed");
        if (app_duration_min_blocks < 1 || app_duration_min_blocks > app_duration_max_blocks)
            throw std::invalid_argument("app duration range malformed");
        if (arrival_prob_ppm < 0 || arrival_prob_ppm > 1'000'000)
            throw std::invalid_argument("arrival probability out of [0,1]");
        if (latency_min_ms < 0 || latency_min_ms > latency_max_ms)
            throw std::invalid_argument("latency range malformed");
        if (3 * latency_max_ms >= block_time_ms)
            throw std::invalid_argument("latency too large for the block time");
        if (crash_leader_at_height < 0 || crash_leader_at_height > blocks)
            throw std::invalid_argument("crash height outside the run");
    }
};

}  // namespace edgebal::simnet
