#include <doctest.h>

#include "edgebal/gossip/gossip.hpp"
#include "test_support.hpp"

using namespace edgebal;
using gossip::GossipConfig;
using gossip::GossipNode;
using gossip::ScorePtr;
using gossip::SigKey;

namespace {

struct Rig {
    std::vector<KeyPair> keys = testsup::abcd_keys();
    GossipConfig cfg;
    std::unique_ptr<GossipNode> node;
    daemon::MockRuntime runtime;

    Rig() {
        cfg.delta_st_ms = 500;
        cfg.collect_interval_ms = 500;
        node = std::make_unique<GossipNode>(keys[0], cfg);
        node->set_peers({keys[1].id(), keys[2].id(), keys[3].id()});
    }

    ScorePtr make_score(int key_index, std::int64_t collected_at,
                        std::vector<AppRecord> apps = {}) {
        auto s = std::make_shared<NodeScore>(keys[static_cast<std::size_t>(key_index)].id(),
                                             std::move(apps), collected_at);
        s->sign_with(keys[static_cast<std::size_t>(key_index)]);
        return s;
    }
};

}  // namespace

TEST_CASE("collect_local_state: empty node, direct mapping, stable encoding") {
    Rig rig;

    ScorePtr empty = rig.node->collect_local_state(rig.runtime, 1000);
    CHECK(empty->apps().empty());
    CHECK(empty->signature_valid());
    CHECK(empty->collected_at() == 1000);
    CHECK_FALSE(empty->stale());

    rig.runtime.start(planner::AppDescriptor{"x", ResourceFraction{300'000}, {}, {}, {}});
    ScorePtr one = rig.node->collect_local_state(rig.runtime, 1500);
    REQUIRE(one->apps().size() == 1);
    CHECK(one->apps()[0].app_id == "x");
    CHECK(one->apps()[0].cpu.ppm == 300'000);

    // Two of the worked-example rows: repeated collection at the same
    // timestamp encodes identically.
    rig.runtime.remove("x");
    rig.runtime.start(planner::AppDescriptor{"v0", ResourceFraction{900'000},
                                             ResourceFraction{500'000}, ResourceFraction{230'000},
                                             ResourceFraction{23'000}});
    rig.runtime.start(planner::AppDescriptor{"v3", ResourceFraction{560'000},
                                             ResourceFraction{350'000}, ResourceFraction{140'000},
                                             ResourceFraction{101'000}});
    Bytes first = rig.node->collect_local_state(rig.runtime, 2000)->canonical_encode();
    Bytes second = rig.node->collect_local_state(rig.runtime, 2000)->canonical_encode();
    CHECK(first == second);
    CHECK(planner::node_load(*rig.node->own_score(), {}) == 1'460'000);
}

TEST_CASE("collect_local_state falls back to a stale re-stamp when introspection fails") {
    Rig rig;
    rig.runtime.start(planner::AppDescriptor{"x", ResourceFraction{250'000}, {}, {}, {}});
    ScorePtr good = rig.node->collect_local_state(rig.runtime, 1000);
    CHECK_FALSE(good->stale());

    rig.runtime.set_introspection_failure(true);
    ScorePtr fallback = rig.node->collect_local_state(rig.runtime, 1500);
    CHECK(fallback->stale());
    CHECK(fallback->collected_at() == 1500);
    REQUIRE(fallback->apps().size() == 1);
    CHECK(fallback->apps()[0].app_id == "x");
    CHECK(fallback->signature_valid());
}

TEST_CASE("on_timer: not elapsed, elapsed with three peers, isolated node") {
    Rig rig;
    rig.node->collect_local_state(rig.runtime, 0);
    CHECK(rig.node->on_timer(0).size() == 3);  // first broadcast is immediate

    CHECK(rig.node->on_timer(499).empty());   // delta_st - 1
    CHECK(rig.node->on_timer(500).size() == 3);

    // DYNT carries only the 64 signature bytes.
    SigKey sig = SigKey::of(*rig.node->own_score());
    CHECK(sig.bytes.size() == 64);

    GossipNode loner(rig.keys[1], rig.cfg);
    daemon::MockRuntime rt;
    loner.collect_local_state(rt, 0);
    CHECK(loner.on_timer(0).empty());   // zero peers, timer still resets
    CHECK(loner.on_timer(250).empty());
    // After delta_st the timer fires again (still no peers to address).
    CHECK(loner.on_timer(500).empty());
}

TEST_CASE("handle_dynt: seen suppression, pending race, pending timeout") {
    Rig rig;
    ScorePtr msg = rig.make_score(1, 100);
    SigKey sig = SigKey::of(*msg);

    // First DYNT gets yes, an immediate second from another peer gets no.
    CHECK(rig.node->handle_dynt(sig, rig.keys[1].id(), 1000));
    CHECK_FALSE(rig.node->handle_dynt(sig, rig.keys[2].id(), 1001));

    // Payload never arrives: after the pending timeout a DYNT gets yes again.
    std::int64_t timeout = rig.cfg.pending_timeout_ms();
    CHECK_FALSE(rig.node->handle_dynt(sig, rig.keys[3].id(), 1000 + timeout - 1));
    CHECK(rig.node->handle_dynt(sig, rig.keys[3].id(), 1001 + timeout));

    // Payload that did arrive suppresses future DYNTs for good.
    (void)rig.node->handle_score(msg, rig.keys[1].id(), 2000);
    CHECK_FALSE(rig.node->handle_dynt(sig, rig.keys[2].id(), 2001));
    CHECK_FALSE(rig.node->handle_dynt(sig, rig.keys[2].id(), 2001 + 10 * timeout));
}

TEST_CASE("handle_score: flood rule, dedup, stale pool semantics, tamper counter") {
    Rig rig;

    ScorePtr fresh = rig.make_score(1, 2000);
    auto forward = rig.node->handle_score(fresh, rig.keys[1].id(), 2000);
    // Forward to everyone except the peer it came from.
    CHECK(forward == std::vector<NodeId>{rig.keys[2].id(), rig.keys[3].id()});
    CHECK(rig.node->pool().at(rig.keys[1].id())->collected_at() == 2000);

    // Same message re-delivered from another peer: dropped.
    CHECK(rig.node->handle_score(fresh, rig.keys[2].id(), 2001).empty());
    CHECK(rig.node->counters().duplicates_dropped == 1);

    // Older score for the same node: flooding is by message identity, so
    // it is forwarded, but the pool keeps the fresher entry.
    ScorePtr older = rig.make_score(1, 1500);
    auto fwd_old = rig.node->handle_score(older, rig.keys[3].id(), 2002);
    CHECK(fwd_old == std::vector<NodeId>{rig.keys[1].id(), rig.keys[2].id()});
    CHECK(rig.node->pool().at(rig.keys[1].id())->collected_at() == 2000);

    // Tampered payload: dropped, counted, not forwarded, not pooled.
    // (Flip a timestamp byte so the message still decodes.)
    auto tampered_bytes = rig.make_score(2, 2500)->canonical_encode();
    tampered_bytes[46] ^= 0x01;
    auto tampered = std::make_shared<const NodeScore>(NodeScore::decode(tampered_bytes));
    CHECK(rig.node->handle_score(tampered, rig.keys[2].id(), 2500).empty());
    CHECK(rig.node->counters().tampered_dropped == 1);
    CHECK_FALSE(rig.node->pool().contains(rig.keys[2].id()));
}

TEST_CASE("pool freshness: maximal collected_at wins, ties by ascending signature") {
    Rig rig;
    ScorePtr a = rig.make_score(1, 1000);
    ScorePtr b = rig.make_score(1, 3000);
    (void)rig.node->handle_score(b, rig.keys[1].id(), 0);
    (void)rig.node->handle_score(a, rig.keys[2].id(), 0);
    CHECK(rig.node->pool().at(rig.keys[1].id())->collected_at() == 3000);

    // Equal collected_at, different content: the smaller signature wins.
    ScorePtr t1 = rig.make_score(2, 5000);
    ScorePtr t2 = rig.make_score(
        2, 5000, {testsup::app_record("z", 1000, 0, 0, 0, 5000)});
    (void)rig.node->handle_score(t1, rig.keys[1].id(), 0);
    (void)rig.node->handle_score(t2, rig.keys[1].id(), 0);
    const auto& kept = rig.node->pool().at(rig.keys[2].id());
    const auto& smaller =
        t1->signature().bytes < t2->signature().bytes ? t1 : t2;
    CHECK(kept->signature().bytes == smaller->signature().bytes);
}

TEST_CASE("seen cache evicts FIFO at capacity") {
    Rig rig;
    GossipConfig tiny = rig.cfg;
    tiny.seen_cache_capacity = 4;
    GossipNode node(rig.keys[0], tiny);
    node.set_peers({rig.keys[1].id(), rig.keys[2].id()});

    std::vector<ScorePtr> msgs;
    for (int i = 0; i < 5; ++i) msgs.push_back(rig.make_score(1, 100 + i));
    for (const auto& m : msgs) (void)node.handle_score(m, rig.keys[1].id(), 0);

    // The first message fell out of the cache: handled as new again.
    CHECK_FALSE(node.handle_score(msgs[0], rig.keys[1].id(), 0).empty());
    // ...but the pool still holds the freshest score regardless.
    CHECK(node.pool().at(rig.keys[1].id())->collected_at() == 104);
}

TEST_CASE("dynt reply with a known offer ships the payload; no or unknown ships nothing") {
    Rig rig;
    ScorePtr msg = rig.make_score(1, 700);
    (void)rig.node->handle_score(msg, rig.keys[1].id(), 700);
    SigKey sig = SigKey::of(*msg);

    auto payload = rig.node->handle_dynt_reply(sig, rig.keys[2].id(), true);
    REQUIRE(payload.has_value());
    CHECK((*payload)->canonical_encode() == msg->canonical_encode());

    CHECK_FALSE(rig.node->handle_dynt_reply(sig, rig.keys[3].id(), false).has_value());

    SigKey unknown{};
    CHECK_FALSE(rig.node->handle_dynt_reply(unknown, rig.keys[3].id(), true).has_value());
}
