#include "edgebal/consensus/block.hpp"

namespace edgebal::consensus {

Bytes Block::signing_bytes() const {
    Encoder e;
    e.put_u8(static_cast<std::uint8_t>(WireTag::block));
    e.put_u64(height);
    e.put_array(prev_hash.bytes);
    e.put_u64(retry);
    e.put_array(leader.bytes);
    plan.encode_into(e);
    e.put_list_len(scores.size());
    for (const auto& s : scores) s.encode_into(e);
    e.put_list_len(queue.size());
    for (const auto& a : queue) a.encode_into(e);
    e.put_i64(timestamp_ms);
    return e.take();
}

void Block::sign_with(const KeyPair& key) {
    if (key.id() != leader) throw std::invalid_argument("signing key does not match leader");
    leader_signature = key.sign(signing_bytes());
    sig_ok_ = true;
    hash_.reset();
}

bool Block::signature_valid() const {
    if (!sig_ok_) sig_ok_ = verify(leader_signature, signing_bytes());
    return *sig_ok_;
}

Bytes Block::canonical_encode() const {
    Bytes b = signing_bytes();
    b.insert(b.end(), leader_signature.bytes.begin(), leader_signature.bytes.end());
    return b;
}

const Hash& Block::hash() const {
    if (!hash_) hash_ = sha256(canonical_encode());
    return *hash_;
}

Block Block::decode(std::span<const std::uint8_t> data) {
    Decoder d(data);
    Block b = decode_from(d);
    d.expect_end();
    return b;
}

Block Block::decode_from(Decoder& d) {
    if (d.get_u8() != static_cast<std::uint8_t>(WireTag::block)) d.fail("bad block tag");
    Block b;
    b.height = d.get_u64();
    b.prev_hash.bytes = d.get_array<32>();
    b.retry = d.get_u64();
    b.leader.bytes = d.get_array<32>();
    b.plan = planner::MigrationPlan::decode_from(d);
    std::uint64_t n = d.get_list_len(1u << 16);
    b.scores.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        NodeScore s = NodeScore::decode_from(d);
        if (!b.scores.empty() && !(b.scores.back().node() < s.node()))
            d.fail("score snapshot not strictly sorted by node id");
        b.scores.push_back(std::move(s));
    }
    std::uint64_t q = d.get_list_len(1u << 20);
    b.queue.reserve(q);
    for (std::uint64_t i = 0; i < q; ++i) b.queue.push_back(planner::AppDescriptor::decode_from(d));
    b.timestamp_ms = d.get_i64();
    if (b.timestamp_ms < 0) d.fail("negative block timestamp");
    b.leader_signature.bytes = d.get_array<64>();
    b.leader_signature.signer = b.leader;
    return b;
}

const Block& Block::genesis() {
    // All-zero leader and signature: block 0 predates any keys or scores
    // and must be identical on every node regardless of configuration.
    static const Block g = [] {
        Block b;
        b.height = 0;
        b.timestamp_ms = 0;
        return b;
    }();
    return g;
}

}  // namespace edgebal::consensus
