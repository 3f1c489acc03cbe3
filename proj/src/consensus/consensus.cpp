#include "edgebal/consensus/consensus.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <memory>
#include <stdexcept>

namespace edgebal::consensus {

const char* to_string(VerifyResult r) {
    switch (r) {
        case VerifyResult::accept: return "accept";
        case VerifyResult::bad_link: return "bad-link";
        case VerifyResult::bad_height: return "bad-height";
        case VerifyResult::wrong_leader: return "wrong-leader";
        case VerifyResult::bad_signature: return "bad-signature";
        case VerifyResult::plan_mismatch: return "plan-mismatch";
        case VerifyResult::bad_snapshot: return "bad-snapshot";
    }
    return "unknown";
}

NodeId elect_leader(const ElectionInput& input) {
    if (input.candidates.empty())
        throw std::invalid_argument("leader election requires a nonempty candidate set");

    Encoder prefix;
    prefix.put_array(input.prev_hash.bytes);
    prefix.put_u64(input.height);
    prefix.put_u64(input.retry);
    const Bytes& head = prefix.bytes();

    // The lottery is a pure function and every node of an in-process
    // network evaluates it with identical inputs once per round, so a
    // small memo keyed by a digest of the whole input pays for itself.
    Bytes key_bytes = head;
    for (const auto& c : input.candidates)
        key_bytes.insert(key_bytes.end(), c.bytes.begin(), c.bytes.end());
    Hash key = sha256(key_bytes);

    struct MemoEntry {
        Hash key;
        NodeId winner;
        bool used = false;
    };
    thread_local std::array<MemoEntry, 64> memo{};
    auto& slot = memo[static_cast<std::size_t>(key.bytes[0]) % memo.size()];
    if (slot.used && slot.key == key) return slot.winner;

    const NodeId* best = nullptr;
    Hash best_digest;
    for (const auto& c : input.candidates) {
        Bytes msg = head;
        msg.insert(msg.end(), c.bytes.begin(), c.bytes.end());
        Hash digest = sha256(msg);
        if (!best || digest < best_digest || (digest == best_digest && c < *best)) {
            best = &c;
            best_digest = digest;
        }
    }
    slot = MemoEntry{key, *best, true};
    return *best;
}

ChainState::ChainState() {
    blocks_.push_back(std::make_shared<const Block>(Block::genesis()));
}

VerifyResult ChainState::verify(const Block& block, const ConsensusParams& params) const {
    if (block.prev_hash != head_hash()) return VerifyResult::bad_link;
    if (block.height != height() + 1) return VerifyResult::bad_height;

    if (block.scores.empty()) return VerifyResult::bad_snapshot;
    for (std::size_t i = 0; i < block.scores.size(); ++i) {
        const auto& s = block.scores[i];
        if (i > 0 && !(block.scores[i - 1].node() < s.node())) return VerifyResult::bad_snapshot;
        if (block.timestamp_ms - s.collected_at() > params.freshness_ms())
            return VerifyResult::bad_snapshot;
    }

    ElectionInput election;
    election.prev_hash = block.prev_hash;
    election.height = block.height;
    election.retry = block.retry;
    for (const auto& s : block.scores) election.candidates.push_back(s.node());
    if (elect_leader(election) != block.leader) return VerifyResult::wrong_leader;

    if (!block.signature_valid()) return VerifyResult::bad_signature;
    for (const auto& s : block.scores)
        if (!s.signature_valid()) return VerifyResult::bad_signature;

    // Recompute-to-verify: the plan must be reproducible byte-for-byte
    // from the block's own data plus the chain's assignment map.
    planner::BlockData data{block.scores, planning_assignments(block.scores), block.queue};
    planner::MigrationPlan recomputed = planner::generate_plan(data, params.planner);
    if (recomputed.canonical_encode() != block.plan.canonical_encode())
        return VerifyResult::plan_mismatch;

    return VerifyResult::accept;
}

void ChainState::append(const BlockPtr& block_ptr, const ConsensusParams& params) {
    const Block& block = *block_ptr;
    // Adopt first: apps the snapshot reports but no plan ever placed
    // (preloaded workloads) enter the map before the plan folds, so a
    // migration of such an app in this very block is well defined.
    for (const auto& s : block.scores) {
        for (const auto& a : s.apps()) {
            if (assignments_.contains(a.app_id)) continue;
            assignments_[a.app_id] = AssignedApp{
                s.node(),
                planner::AppDescriptor{a.app_id, a.cpu, a.ram, a.disk, a.network},
                block.timestamp_ms};
        }
    }
    for (const auto& [app_id, node] : block.plan.placements) {
        auto it = std::find_if(block.queue.begin(), block.queue.end(),
                               [&](const auto& a) { return a.app_id == app_id; });
        if (it == block.queue.end())
            throw std::logic_error("verified plan places app missing from queue snapshot");
        assignments_[app_id] = AssignedApp{node, *it, block.timestamp_ms};
    }
    if (block.plan.migration) {
        auto it = assignments_.find(block.plan.migration->app_id);
        if (it == assignments_.end())
            throw std::logic_error("verified plan migrates unassigned app");
        it->second.node = block.plan.migration->to;
        it->second.placed_at_ms = block.timestamp_ms;
    }

    // Reconcile finished apps out once their node's reports postdate the
    // placement by more than the grace period and no longer list them.
    // Snapshot scores are sorted by node and app rows by id, so both
    // lookups are binary searches.
    for (auto it = assignments_.begin(); it != assignments_.end();) {
        const auto& rec = it->second;
        auto sit = std::lower_bound(block.scores.begin(), block.scores.end(), rec.node,
                                    [](const NodeScore& s, const NodeId& id) {
                                        return s.node() < id;
                                    });
        bool finished = false;
        if (sit != block.scores.end() && sit->node() == rec.node &&
            sit->collected_at() > rec.placed_at_ms + params.prune_grace_ms()) {
            const auto& apps = sit->apps();
            auto ait = std::lower_bound(apps.begin(), apps.end(), it->first,
                                        [](const AppRecord& a, const std::string& id) {
                                            return a.app_id < id;
                                        });
            finished = ait == apps.end() || ait->app_id != it->first;
        }
        it = finished ? assignments_.erase(it) : std::next(it);
    }

    view_dirty_ = true;
    blocks_.push_back(block_ptr);
}

std::map<std::string, NodeId> ChainState::assignment_view() const {
    if (view_dirty_) {
        view_cache_.clear();
        for (const auto& [app, rec] : assignments_) view_cache_.emplace(app, rec.node);
        view_dirty_ = false;
    }
    return view_cache_;
}

std::map<std::string, NodeId> ChainState::planning_assignments(
    const std::vector<NodeScore>& snapshot) const {
    std::map<std::string, NodeId> view = assignment_view();
    for (const auto& s : snapshot)
        for (const auto& a : s.apps()) view.emplace(a.app_id, s.node());
    return view;
}

void ChainState::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open chain file for writing: " + path);
    for (const auto& b : blocks_) {
        Bytes enc = b->canonical_encode();
        Encoder len;
        len.put_u64(enc.size());
        out.write(reinterpret_cast<const char*>(len.bytes().data()),
                  static_cast<std::streamsize>(len.bytes().size()));
        out.write(reinterpret_cast<const char*>(enc.data()), static_cast<std::streamsize>(enc.size()));
    }
    if (!out) throw std::runtime_error("short write to chain file: " + path);
}

void ChainState::append_to_file(const std::string& path, const Block& block) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw std::runtime_error("cannot open chain file for appending: " + path);
    Bytes enc = block.canonical_encode();
    Encoder len;
    len.put_u64(enc.size());
    out.write(reinterpret_cast<const char*>(len.bytes().data()),
              static_cast<std::streamsize>(len.bytes().size()));
    out.write(reinterpret_cast<const char*>(enc.data()), static_cast<std::streamsize>(enc.size()));
    if (!out) throw std::runtime_error("short write to chain file: " + path);
}

ChainState ChainState::load(const std::string& path, const ConsensusParams& params) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open chain file: " + path);
    Bytes raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    ChainState chain;
    std::size_t pos = 0;
    std::uint64_t index = 0;
    while (pos < raw.size()) {
        Decoder frame(std::span<const std::uint8_t>(raw.data() + pos, raw.size() - pos));
        std::uint64_t len;
        try {
            len = frame.get_u64();
            if (len > frame.remaining()) frame.fail("block record length exceeds file");
        } catch (const CodecError& e) {
            throw CodecError("chain file framing error", pos + e.offset);
        }
        Block b;
        try {
            b = Block::decode(std::span<const std::uint8_t>(raw.data() + pos + 8, len));
        } catch (const CodecError& e) {
            throw CodecError("block " + std::to_string(index) + " undecodable", pos + 8 + e.offset);
        }
        if (index == 0) {
            if (!(b == Block::genesis()))
                throw std::runtime_error("chain file does not start at the canonical genesis");
        } else {
            VerifyResult r = chain.verify(b, params);
            if (r != VerifyResult::accept)
                throw std::runtime_error("block " + std::to_string(index) +
                                         " fails verification: " + to_string(r));
            chain.append(std::make_shared<const Block>(std::move(b)), params);
        }
        pos += 8 + len;
        ++index;
    }
    if (index == 0) throw CodecError("chain file is empty", 0);
    return chain;
}

std::vector<NodeId> fresh_candidates(const ScorePoolView& pool, std::int64_t now_ms,
                                     const ConsensusParams& params) {
    std::vector<NodeId> out;
    for (const auto& s : pool.scores)
        if (now_ms - s.collected_at() < params.freshness_ms()) out.push_back(s.node());
    std::sort(out.begin(), out.end());
    return out;
}

ElectionInput on_round_timeout(const ChainState& chain, const ScorePoolView& pool,
                               std::uint64_t expired_retry, std::int64_t now_ms,
                               const ConsensusParams& params) {
    return ElectionInput{chain.head_hash(), chain.height() + 1, expired_retry + 1,
                         fresh_candidates(pool, now_ms, params)};
}

std::vector<planner::AppDescriptor> reclaim_stale_apps(const ChainState& chain,
                                                       const ScorePoolView& pool,
                                                       std::int64_t now_ms,
                                                       const ConsensusParams& params) {
    std::set<NodeId> fresh;
    for (const auto& s : pool.scores)
        if (now_ms - s.collected_at() < params.freshness_ms()) fresh.insert(s.node());

    std::vector<planner::AppDescriptor> out;
    for (const auto& [app, rec] : chain.assignments())
        if (!fresh.contains(rec.node)) out.push_back(rec.descriptor);
    return out;  // map order keeps this sorted by app id
}

BlockPtr create_block(const ChainState& chain, const ScorePoolView& pool,
                      std::vector<planner::AppDescriptor> admitted_queue, const KeyPair& key,
                      std::int64_t now_ms, std::uint64_t retry, const ConsensusParams& params) {
    Block b;
    b.height = chain.height() + 1;
    b.prev_hash = chain.head_hash();
    b.retry = retry;
    b.timestamp_ms = now_ms;

    for (const auto& s : pool.scores)
        if (now_ms - s.collected_at() < params.freshness_ms()) b.scores.push_back(s);
    auto by_node = [](const NodeScore& a, const NodeScore& c) { return a.node() < c.node(); };
    if (!std::is_sorted(b.scores.begin(), b.scores.end(), by_node))
        std::sort(b.scores.begin(), b.scores.end(), by_node);

    ElectionInput election;
    election.prev_hash = b.prev_hash;
    election.height = b.height;
    election.retry = retry;
    for (const auto& s : b.scores) election.candidates.push_back(s.node());
    NodeId winner = elect_leader(election);
    if (winner != key.id())
        throw std::runtime_error("refusing to create block: caller is not the elected leader");
    b.leader = winner;

    b.queue = reclaim_stale_apps(chain, pool, now_ms, params);
    b.queue.insert(b.queue.end(), admitted_queue.begin(), admitted_queue.end());

    planner::BlockData data{b.scores, chain.planning_assignments(b.scores), b.queue};
    b.plan = planner::generate_plan(data, params.planner);

    b.sign_with(key);
    return std::make_shared<const Block>(std::move(b));
}

std::vector<LocalAction> local_actions(const Block& block, const ChainState& chain_before,
                                       const NodeId& self) {
    std::vector<LocalAction> actions;
    for (const auto& [app_id, node] : block.plan.placements) {
        if (node != self) continue;
        auto it = std::find_if(block.queue.begin(), block.queue.end(),
                               [&](const auto& a) { return a.app_id == app_id; });
        if (it == block.queue.end()) continue;
        actions.push_back({LocalAction::Kind::start, app_id, node, *it});
    }
    if (block.plan.migration) {
        const auto& m = *block.plan.migration;
        planner::AppDescriptor desc{m.app_id, {}, {}, {}, {}};
        auto it = chain_before.assignments().find(m.app_id);
        if (it != chain_before.assignments().end()) {
            desc = it->second.descriptor;
        } else {
            // Adopted in this very block: its descriptor is the measured
            // row on the source node's embedded score.
            for (const auto& s : block.scores) {
                if (s.node() != m.from) continue;
                for (const auto& a : s.apps())
                    if (a.app_id == m.app_id)
                        desc = planner::AppDescriptor{a.app_id, a.cpu, a.ram, a.disk, a.network};
            }
        }
        if (m.from == self)
            actions.push_back({LocalAction::Kind::checkpoint_and_send, m.app_id, m.to, desc});
        else if (m.to == self)
            actions.push_back({LocalAction::Kind::await_and_resume, m.app_id, m.from, desc});
    }
    return actions;
}

}  // namespace edgebal::consensus
