#include "edgebal/planner/planner.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>

namespace edgebal::planner {

void AppDescriptor::encode_into(Encoder& e) const {
    e.put_string(app_id);
    e.put_i64(cpu.ppm);
    e.put_i64(ram.ppm);
    e.put_i64(disk.ppm);
    e.put_i64(network.ppm);
}

AppDescriptor AppDescriptor::decode_from(Decoder& d) {
    AppDescriptor a;
    a.app_id = d.get_string();
    if (a.app_id.empty()) d.fail("empty app id");
    a.cpu = ResourceFraction{d.get_i64()};
    a.ram = ResourceFraction{d.get_i64()};
    a.disk = ResourceFraction{d.get_i64()};
    a.network = ResourceFraction{d.get_i64()};
    if (!a.cpu.valid() || !a.ram.valid() || !a.disk.valid() || !a.network.valid())
        d.fail("resource fraction out of range");
    return a;
}

Bytes MigrationPlan::canonical_encode() const {
    Encoder e;
    e.put_u8(static_cast<std::uint8_t>(WireTag::plan));
    encode_into(e);
    return e.take();
}

void MigrationPlan::encode_into(Encoder& e) const {
    e.put_list_len(placements.size());
    for (const auto& [app, node] : placements) {
        e.put_string(app);
        e.put_array(node.bytes);
    }
    e.put_bool(migration.has_value());
    if (migration) {
        e.put_string(migration->app_id);
        e.put_array(migration->from.bytes);
        e.put_array(migration->to.bytes);
    }
}

MigrationPlan MigrationPlan::decode(std::span<const std::uint8_t> data) {
    Decoder d(data);
    if (d.get_u8() != static_cast<std::uint8_t>(WireTag::plan)) d.fail("bad plan tag");
    MigrationPlan p = decode_from(d);
    d.expect_end();
    return p;
}

MigrationPlan MigrationPlan::decode_from(Decoder& d) {
    MigrationPlan p;
    std::uint64_t n = d.get_list_len(1u << 20);
    p.placements.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::string app = d.get_string();
        NodeId node;
        node.bytes = d.get_array<32>();
        p.placements.emplace_back(std::move(app), node);
    }
    if (d.get_bool()) {
        Migration m;
        m.app_id = d.get_string();
        m.from.bytes = d.get_array<32>();
        m.to.bytes = d.get_array<32>();
        if (m.from == m.to) d.fail("migration from == to");
        p.migration = std::move(m);
    }
    if (!p.placements.empty() && p.migration) d.fail("plan mixes placements and migration");
    return p;
}

std::int64_t app_load(const AppRecord& app, const ResourceWeights& w) {
    std::int64_t s = w.cpu * app.cpu.ppm + w.ram * app.ram.ppm + w.disk * app.disk.ppm +
                     w.network * app.network.ppm;
    return s / ResourceFraction::kUnit;
}

std::int64_t app_load(const AppDescriptor& app, const ResourceWeights& w) {
    std::int64_t s = w.cpu * app.cpu.ppm + w.ram * app.ram.ppm + w.disk * app.disk.ppm +
                     w.network * app.network.ppm;
    return s / ResourceFraction::kUnit;
}

std::int64_t node_load(const NodeScore& score, const ResourceWeights& w) {
    std::int64_t cpu = 0, ram = 0, disk = 0, net = 0;
    for (const auto& a : score.apps()) {
        cpu += a.cpu.ppm;
        ram += a.ram.ppm;
        disk += a.disk.ppm;
        net += a.network.ppm;
    }
    return (w.cpu * cpu + w.ram * ram + w.disk * disk + w.network * net) /
           ResourceFraction::kUnit;
}

namespace {

struct LoadedNode {
    NodeId id;
    std::int64_t load;
    const NodeScore* score;
};

std::vector<LoadedNode> loaded_nodes(const BlockData& data, const ResourceWeights& w) {
    if (data.scores.empty()) throw std::invalid_argument("block data has no scores");
    std::vector<LoadedNode> out;
    out.reserve(data.scores.size());
    for (const auto& s : data.scores) out.push_back({s.node(), node_load(s, w), &s});
    return out;
}

// Tie rule everywhere: smaller load first (or larger for max), then
// lexicographically smallest node id.
const LoadedNode& min_node(const std::vector<LoadedNode>& nodes) {
    const LoadedNode* best = &nodes.front();
    for (const auto& n : nodes)
        if (n.load < best->load || (n.load == best->load && n.id < best->id)) best = &n;
    return *best;
}

const LoadedNode& max_node(const std::vector<LoadedNode>& nodes) {
    const LoadedNode* best = &nodes.front();
    for (const auto& n : nodes)
        if (n.load > best->load || (n.load == best->load && n.id < best->id)) best = &n;
    return *best;
}

}  // namespace

NodeId find_max_loaded_node(const BlockData& data, const ResourceWeights& w) {
    return max_node(loaded_nodes(data, w)).id;
}

NodeId find_min_loaded_node(const BlockData& data, const ResourceWeights& w) {
    return min_node(loaded_nodes(data, w)).id;
}

MigrationPlan generate_plan(const BlockData& data, const PlannerOptions& opts) {
    MigrationPlan plan;
    if (data.scores.empty()) return plan;
    auto nodes = loaded_nodes(data, opts.weights);

    if (!data.queue.empty()) {
        // Drain the queue onto the momentarily least-loaded node, charging
        // each placement's declared load so the whole batch does not pile
        // onto a single node.
        for (const auto& app : data.queue) {
            auto& target = const_cast<LoadedNode&>(min_node(nodes));
            target.load += app_load(app, opts.weights);
            plan.placements.emplace_back(app.app_id, target.id);
        }
        return plan;
    }

    if (!opts.migration_enabled) return plan;

    const LoadedNode& max = max_node(nodes);
    const LoadedNode& min = min_node(nodes);
    if (max.id == min.id) return plan;

    // Most loaded app on the max node; ties by smallest app id (the app
    // list is already sorted by id, so the first strict improvement wins).
    // Only apps the chain assigns to the max node are movable: a row that
    // has not entered the assignment map yet cannot be retargeted.
    const AppRecord* candidate = nullptr;
    std::int64_t candidate_load = 0;
    for (const auto& a : max.score->apps()) {
        auto it = data.assignments.find(a.app_id);
        if (it == data.assignments.end() || it->second != max.id) continue;
        std::int64_t l = app_load(a, opts.weights);
        if (!candidate || l > candidate_load) {
            candidate = &a;
            candidate_load = l;
        }
    }
    if (!candidate) return plan;  // max node runs nothing; nothing to move

    std::int64_t current_delta = max.load - min.load;
    std::int64_t future_delta = (max.load - candidate_load) - (min.load + candidate_load);
    if (std::abs(current_delta) > std::abs(future_delta))
        plan.migration = Migration{candidate->app_id, max.id, min.id};
    return plan;
}

BlockData apply_plan(const BlockData& data, const MigrationPlan& plan) {
    BlockData out = data;

    auto known_node = [&](const NodeId& id) {
        for (const auto& s : out.scores)
            if (s.node() == id) return true;
        return false;
    };

    for (const auto& [app_id, node] : plan.placements) {
        auto it = std::find_if(out.queue.begin(), out.queue.end(),
                               [&](const AppDescriptor& a) { return a.app_id == app_id; });
        if (it == out.queue.end())
            throw std::invalid_argument("placement references app not in queue: " + app_id);
        if (!known_node(node))
            throw std::invalid_argument("placement references unknown node for " + app_id);
        out.queue.erase(it);
        out.assignments[app_id] = node;
    }

    if (plan.migration) {
        const auto& m = *plan.migration;
        auto it = out.assignments.find(m.app_id);
        if (it == out.assignments.end())
            throw std::invalid_argument("migration references unassigned app: " + m.app_id);
        if (it->second != m.from)
            throw std::invalid_argument("migration source does not match assignment of " +
                                        m.app_id);
        if (!known_node(m.to)) throw std::invalid_argument("migration target unknown node");
        it->second = m.to;
    }

    return out;
}

}  // namespace edgebal::planner
