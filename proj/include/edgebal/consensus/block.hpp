#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "edgebal/core/codec.hpp"
#include "edgebal/core/crypto.hpp"
#include "edgebal/core/ids.hpp"
#include "edgebal/core/score.hpp"
#include "edgebal/planner/planner.hpp"

namespace edgebal::consensus {

// One consensus round's output: the leader-signed record of the score
// snapshot it planned from, the admitted app queue, and the resulting
// migration plan, hash-linked to its predecessor. Every field above the
// signature is covered by it; the block hash covers everything.
class Block {
public:
    Block() = default;
    // Copies reset the memoized hash and signature validity: fields are
    // public, so a copied block may be mutated before re-verification.
    Block(const Block& o)
        : height(o.height), prev_hash(o.prev_hash), retry(o.retry), leader(o.leader),
          plan(o.plan), scores(o.scores), queue(o.queue), timestamp_ms(o.timestamp_ms),
          leader_signature(o.leader_signature) {}
    Block& operator=(const Block& o) {
        if (this != &o) {
            *this = Block(o);
        }
        return *this;
    }
    Block(Block&&) = default;
    Block& operator=(Block&&) = default;

    std::uint64_t height = 0;
    Hash prev_hash;
    std::uint64_t retry = 0;
    NodeId leader;
    planner::MigrationPlan plan;
    std::vector<NodeScore> scores;                  // sorted by node id
    std::vector<planner::AppDescriptor> queue;      // planner input queue
    std::int64_t timestamp_ms = 0;
    Signature leader_signature;

    [[nodiscard]] Bytes signing_bytes() const;
    void sign_with(const KeyPair& key);
    [[nodiscard]] bool signature_valid() const;

    [[nodiscard]] Bytes canonical_encode() const;
    [[nodiscard]] const Hash& hash() const;  // memoized over the canonical encoding

    static Block decode(std::span<const std::uint8_t> data);
    static Block decode_from(Decoder& d);

    bool operator==(const Block& o) const {
        return height == o.height && prev_hash == o.prev_hash && retry == o.retry &&
               leader == o.leader && plan == o.plan && scores == o.scores && queue == o.queue &&
               timestamp_ms == o.timestamp_ms && leader_signature == o.leader_signature;
    }

    // The fixed, leaderless block 0 every node constructs identically.
    static const Block& genesis();

private:
    mutable std::optional<Hash> hash_;
    mutable std::optional<bool> sig_ok_;
};

}  // namespace edgebal::consensus
