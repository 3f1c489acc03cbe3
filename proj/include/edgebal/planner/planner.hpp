#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "edgebal/core/codec.hpp"
#include "edgebal/core/ids.hpp"
#include "edgebal/core/resource.hpp"
#include "edgebal/core/score.hpp"

namespace edgebal::planner {

// An application waiting for placement, with its declared per-dimension
// load. Until a node actually runs it and measures, the declared values
// are the best estimate available.
struct AppDescriptor {
    std::string app_id;
    ResourceFraction cpu;
    ResourceFraction ram;
    ResourceFraction disk;
    ResourceFraction network;

    auto operator<=>(const AppDescriptor&) const = default;

    void encode_into(Encoder& e) const;
    static AppDescriptor decode_from(Decoder& d);
};

struct Migration {
    std::string app_id;
    NodeId from;
    NodeId to;

    auto operator<=>(const Migration&) const = default;
};

// Deterministic app->node assignment delta for one consensus round:
// either placements that drain the queue, or at most one rebalancing
// migration, never both.
struct MigrationPlan {
    std::vector<std::pair<std::string, NodeId>> placements;
    std::optional<Migration> migration;

    [[nodiscard]] bool empty() const { return placements.empty() && !migration; }

    bool operator==(const MigrationPlan&) const = default;

    [[nodiscard]] Bytes canonical_encode() const;
    void encode_into(Encoder& e) const;
    static MigrationPlan decode(std::span<const std::uint8_t> data);
    static MigrationPlan decode_from(Decoder& d);
};

// Planner input: everything a verifier can reconstruct from the chain and
// the block itself. Scores sorted by node id, assignments keyed by app id,
// queue in leader-chosen (deterministically embedded) order.
struct BlockData {
    std::vector<NodeScore> scores;
    std::map<std::string, NodeId> assignments;
    std::vector<AppDescriptor> queue;
};

struct PlannerOptions {
    ResourceWeights weights = ResourceWeights::cpu_only();
    // Network-wide switch; the control arm of the simulation turns the
    // rebalancing branch off while keeping queue placement identical.
    bool migration_enabled = true;
};

// Weighted scalar load of one score: sum over dimensions of weight times
// the per-app sum, in ppm. Exact integer arithmetic throughout.
std::int64_t node_load(const NodeScore& score, const ResourceWeights& weights);

// Scalarized load of a single app row / descriptor under `weights`.
std::int64_t app_load(const AppRecord& app, const ResourceWeights& weights);
std::int64_t app_load(const AppDescriptor& app, const ResourceWeights& weights);

// Max/min loaded node, ties broken by smallest node id. Throws
// std::invalid_argument on empty score lists (malformed block data).
NodeId find_max_loaded_node(const BlockData& data, const ResourceWeights& weights = {});
NodeId find_min_loaded_node(const BlockData& data, const ResourceWeights& weights = {});

// The deterministic plan generator. Queue nonempty: greedily place each
// queued app on the momentarily least-loaded node, charging its declared
// load. Queue empty: consider moving the most loaded node's biggest app
// to the least loaded node, emitting the migration only if it strictly
// shrinks |maxLoad - minLoad|.
MigrationPlan generate_plan(const BlockData& data, const PlannerOptions& opts = {});

// Folds a plan into block data: placements leave the queue and enter the
// assignment map, the migration retargets its app. Throws
// std::invalid_argument when the plan references unknown apps or nodes.
BlockData apply_plan(const BlockData& data, const MigrationPlan& plan);

}  // namespace edgebal::planner
