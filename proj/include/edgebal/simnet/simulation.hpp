#pragma once

#include <map>
#include <memory>
#include <optional>
#include <vector>

#include "edgebal/consensus/consensus.hpp"
#include "edgebal/simnet/config.hpp"
#include "edgebal/simnet/metrics.hpp"
#include "edgebal/simnet/rng.hpp"

namespace edgebal::simnet {

struct Arrival {
    planner::AppDescriptor descriptor;
    int duration_blocks = 0;
    int via_node = 0;  // the node whose Bernoulli draw produced it
};

// Per-node arrival sampling for one block: each node independently
// contributes an arrival with the configured probability; cpu and
// duration drawn uniformly from the configured ranges.
std::vector<Arrival> sample_arrivals(DetRng& rng, const SimConfig& config, int block_height);

struct SimResult {
    MetricsSeries metrics;

    // Protocol observations over the whole run.
    bool chains_identical = true;
    bool conservation_ok = true;  // sum of node loads == sum of running app loads, every round
    std::uint64_t final_height = 0;
    std::uint64_t migrations_total = 0;
    std::uint64_t messages_total = 0;
    std::uint64_t payload_bytes_total = 0;
    std::uint64_t rejected_blocks = 0;
    std::uint64_t equivocations = 0;

    // Score-flood accounting (meaningful for the flooded transport).
    std::uint64_t flood_messages = 0;            // unique score messages broadcast
    std::uint64_t flood_incomplete = 0;          // not delivered to every live node in time
    std::uint64_t max_payload_receptions = 0;    // max over (message, node)
    std::uint64_t max_payload_transmissions = 0; // max over messages of payload sends
    std::int64_t max_flood_latency_ms = 0;       // broadcast to last delivery, complete msgs

    // Crash bookkeeping.
    std::optional<NodeId> crashed_node;
    std::int64_t crash_height_delay_ms = 0;  // extra delay at the crash height

    // Node 0's chain, for persistence and audit.
    std::vector<consensus::BlockPtr> chain;
};

// Runs the full seeded experiment: per round — arrivals, admission while
// the mean reported load stays at or under the threshold, election, block
// production/verification/application at every node, app lifetime
// bookkeeping. Same config (seed included) always returns byte-identical
// metrics and chains.
SimResult run(const SimConfig& config);

// Control arm: same seed, migrations disabled; queue placement only.
SimResult baseline_run(SimConfig config);

}  // namespace edgebal::simnet
