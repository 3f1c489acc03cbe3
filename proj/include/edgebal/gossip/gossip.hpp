#pragma once

#include <cstring>
#include <deque>
#include <memory>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "edgebal/consensus/consensus.hpp"
#include "edgebal/core/crypto.hpp"
#include "edgebal/core/score.hpp"
#include "edgebal/daemon/runtime_adapter.hpp"

namespace edgebal::gossip {

// Dedup key: the 64 signature bytes of a score message. Two messages are
// the same message iff their signatures are byte-equal.
struct SigKey {
    std::array<std::uint8_t, 64> bytes{};

    bool operator==(const SigKey&) const = default;
    static SigKey of(const NodeScore& s) { return SigKey{s.signature().bytes}; }
};

struct SigKeyHash {
    std::size_t operator()(const SigKey& k) const noexcept {
        std::uint64_t v;
        std::memcpy(&v, k.bytes.data(), sizeof(v));
        return static_cast<std::size_t>(v);
    }
};

struct GossipConfig {
    std::int64_t delta_st_ms = 500;          // min interval between own-score broadcasts
    std::int64_t collect_interval_ms = 500;  // local state collection period
    std::size_t seen_cache_capacity = 65536;
    std::int64_t pending_timeout_ms() const { return 2 * delta_st_ms; }
};

struct GossipCounters {
    std::uint64_t tampered_dropped = 0;
    std::uint64_t duplicates_dropped = 0;
    std::uint64_t scores_accepted = 0;
};

using ScorePtr = std::shared_ptr<const NodeScore>;

// Per-node gossip state machine. Owned by the node's single event loop:
// handlers are invoked serially with explicit (event, now) pairs, never
// block, and return the messages the host must put on the wire.
class GossipNode {
public:
    GossipNode(const KeyPair& key, GossipConfig config);

    void set_peers(std::vector<NodeId> peers);
    void add_peer(const NodeId& peer);
    void remove_peer(const NodeId& peer);
    [[nodiscard]] const std::vector<NodeId>& peers() const { return peers_; }
    [[nodiscard]] const NodeId& self() const { return self_; }

    // Builds, signs and pools this node's own score from the runtime.
    // If introspection fails, the previous score is re-stamped with the
    // stale flag so peers can tell a hiccup from a dead node.
    ScorePtr collect_local_state(daemon::RuntimeAdapter& runtime, std::int64_t now_ms);

    // Announcement timer: once delta_st has elapsed, emits one DYNT per
    // peer carrying only the 64 signature bytes of the latest own score.
    [[nodiscard]] std::vector<NodeId> on_timer(std::int64_t now_ms);

    // "Do you need this": yes iff the payload is neither seen nor already
    // promised by an outstanding yes to another peer.
    bool handle_dynt(const SigKey& sig, const NodeId& from, std::int64_t now_ms);

    // A peer answered our DYNT; returns the payload to ship if it said yes.
    std::optional<ScorePtr> handle_dynt_reply(const SigKey& sig, const NodeId& from, bool wanted);

    // Full score payload received: dedup, pool update by freshness, and
    // the flood rule — forward a first-seen message to every connected
    // peer except the one it came from.
    [[nodiscard]] std::vector<NodeId> handle_score(const ScorePtr& score, const NodeId& origin_peer,
                                                   std::int64_t now_ms);

    // Pool-update-only receipt for transports that already guarantee
    // exactly-once delivery (the simulator's direct mode): same signature
    // and freshness semantics, no flood bookkeeping.
    void ingest_score(const ScorePtr& score);

    [[nodiscard]] const ScorePtr& own_score() const { return own_score_; }
    [[nodiscard]] std::optional<ScorePtr> payload_for(const SigKey& sig) const;
    [[nodiscard]] const std::unordered_map<NodeId, ScorePtr>& pool() const { return pool_; }
    [[nodiscard]] consensus::ScorePoolView pool_view() const;
    // Candidate scan without copying score payloads.
    [[nodiscard]] std::vector<NodeId> fresh_ids(std::int64_t now_ms,
                                                std::int64_t freshness_ms) const;
    void remove_from_pool(const NodeId& node);
    [[nodiscard]] const GossipCounters& counters() const { return counters_; }
    [[nodiscard]] const GossipConfig& config() const { return config_; }

private:
    void remember_seen(const SigKey& sig);
    void remember_offer(const SigKey& sig, const ScorePtr& score);
    void pool_update(const ScorePtr& score);

    NodeId self_;
    const KeyPair* key_;
    GossipConfig config_;
    std::vector<NodeId> peers_;

    std::unordered_map<NodeId, ScorePtr> pool_;
    ScorePtr own_score_;
    std::int64_t last_broadcast_ = -1;

    std::unordered_set<SigKey, SigKeyHash> seen_;
    std::deque<SigKey> seen_fifo_;
    std::unordered_map<SigKey, std::int64_t, SigKeyHash> pending_;  // sig -> expiry
    std::unordered_map<SigKey, ScorePtr, SigKeyHash> offers_;
    std::deque<SigKey> offer_fifo_;

    GossipCounters counters_;
};

}  // namespace edgebal::gossip
