#pragma once

#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "edgebal/consensus/block.hpp"
#include "edgebal/core/ids.hpp"
#include "edgebal/planner/planner.hpp"

namespace edgebal::consensus {

// Network-shared parameters. Every node must run with the same values or
// verification legitimately diverges, exactly like chain parameters in
// any ledger system.
struct ConsensusParams {
    std::int64_t block_time_ms = 1000;
    // Scores older than freshness_periods * block_time are stale: their
    // nodes leave the candidate set and their apps re-enter the queue.
    int freshness_periods = 2;
    // Round timeout before the retry counter bumps.
    std::int64_t round_timeout_ms() const { return 2 * block_time_ms; }
    std::int64_t freshness_ms() const { return freshness_periods * block_time_ms; }
    // Grace before a missing score row is read as "app finished".
    std::int64_t prune_grace_ms() const { return block_time_ms; }

    planner::PlannerOptions planner;
};

struct ElectionInput {
    Hash prev_hash;
    std::uint64_t height = 0;
    std::uint64_t retry = 0;
    std::vector<NodeId> candidates;  // ordered, nonempty
};

// Deterministic hash lottery: argmin over candidates of
// sha256(prev_hash || height || retry || candidate), ties by smallest id.
// Zero extra messages, recomputable by every verifier from block data.
NodeId elect_leader(const ElectionInput& input);

enum class VerifyResult {
    accept,
    bad_link,       // prev_hash does not match the chain head
    bad_height,     // height not consecutive
    wrong_leader,   // leader is not the lottery winner for (head, height, retry)
    bad_signature,  // leader signature (or an embedded score signature) invalid
    plan_mismatch,  // recomputed plan differs byte-for-byte
    bad_snapshot,   // embedded snapshot malformed, stale or empty
};

const char* to_string(VerifyResult r);

// What the chain knows about one placed app.
struct AssignedApp {
    NodeId node;
    planner::AppDescriptor descriptor;
    std::int64_t placed_at_ms = 0;  // timestamp of the placing/adopting block
};

using BlockPtr = std::shared_ptr<const Block>;

// Append-only chain plus the assignment map derived by folding plans (and
// reconciling against embedded scores) from genesis. Blocks are held by
// shared pointer: all nodes of an in-process network reference the same
// immutable objects.
class ChainState {
public:
    ChainState();  // starts at the shared genesis block

    [[nodiscard]] const std::vector<BlockPtr>& blocks() const { return blocks_; }
    [[nodiscard]] const Block& head() const { return *blocks_.back(); }
    [[nodiscard]] std::uint64_t height() const { return head().height; }
    [[nodiscard]] const Hash& head_hash() const { return head().hash(); }
    [[nodiscard]] const std::map<std::string, AssignedApp>& assignments() const {
        return assignments_;
    }

    [[nodiscard]] VerifyResult verify(const Block& block, const ConsensusParams& params) const;

    // Appends a verified block and folds its plan into the assignment map.
    // Call only after verify() returned accept.
    void append(const BlockPtr& block, const ConsensusParams& params);

    // Assignment map as the planner wants it.
    [[nodiscard]] std::map<std::string, NodeId> assignment_view() const;

    // Planner input assignments for a block built on this chain: the fold
    // so far, plus adoption of apps the snapshot reports but no plan ever
    // placed (preloaded workloads). Pure function of shared data, so the
    // leader and every verifier compute the same map.
    [[nodiscard]] std::map<std::string, NodeId> planning_assignments(
        const std::vector<NodeScore>& snapshot) const;

    // Serialize / replay as an append-only file of length-prefixed
    // canonical blocks. load() verifies every block as it replays and
    // throws CodecError / std::runtime_error on corruption.
    void save(const std::string& path) const;
    static ChainState load(const std::string& path, const ConsensusParams& params);
    static void append_to_file(const std::string& path, const Block& block);

private:
    std::vector<BlockPtr> blocks_;
    std::map<std::string, AssignedApp> assignments_;
    mutable std::map<std::string, NodeId> view_cache_;
    mutable bool view_dirty_ = true;
};

// Local actions a node derives from an applied block.
struct LocalAction {
    enum class Kind { start, checkpoint_and_send, await_and_resume } kind;
    std::string app_id;
    NodeId counterpart;  // migration peer (destination for sends, source for resumes)
    planner::AppDescriptor descriptor;
};

struct ScorePoolView {
    // Freshest known score per node; the consensus layer only reads.
    std::vector<NodeScore> scores;
};

// Builds the next block: snapshot = fresh scores from the pool (sorted),
// queue = reclaimed apps of stale assigned nodes plus the caller-admitted
// arrivals, plan = generate_plan over exactly that data. The caller must
// be the lottery winner; create refuses otherwise.
BlockPtr create_block(const ChainState& chain, const ScorePoolView& pool,
                      std::vector<planner::AppDescriptor> admitted_queue, const KeyPair& key,
                      std::int64_t now_ms, std::uint64_t retry, const ConsensusParams& params);

// Apps the chain assigns to nodes absent from the fresh score set; they
// re-enter the queue ahead of new arrivals.
std::vector<planner::AppDescriptor> reclaim_stale_apps(const ChainState& chain,
                                                       const ScorePoolView& pool,
                                                       std::int64_t now_ms,
                                                       const ConsensusParams& params);

// Candidate ids for (height, retry) elections from the caller's pool.
std::vector<NodeId> fresh_candidates(const ScorePoolView& pool, std::int64_t now_ms,
                                     const ConsensusParams& params);

// No valid block arrived within the round timeout: bump the retry and
// re-run the election at the same height. Silent candidates stay
// eligible; the lottery input changing is what restores liveness.
ElectionInput on_round_timeout(const ChainState& chain, const ScorePoolView& pool,
                               std::uint64_t expired_retry, std::int64_t now_ms,
                               const ConsensusParams& params);

// Runtime actions for `self` implied by a verified block.
std::vector<LocalAction> local_actions(const Block& block, const ChainState& chain_before,
                                       const NodeId& self);

}  // namespace edgebal::consensus
