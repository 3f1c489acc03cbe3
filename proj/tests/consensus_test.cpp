#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "test_support.hpp"

using namespace edgebal;
using consensus::Block;
using consensus::BlockPtr;
using consensus::ChainState;
using consensus::ConsensusParams;
using consensus::ElectionInput;
using consensus::VerifyResult;

namespace {

ConsensusParams params() {
    ConsensusParams p;
    p.block_time_ms = 1000;
    return p;
}

// Everything a round needs: the table fixture as a live pool.
struct Net {
    testsup::TableFixture fixture = testsup::table_fixture();
    ConsensusParams p = params();

    consensus::ScorePoolView pool_at(std::int64_t now) {
        consensus::ScorePoolView pool;
        for (std::size_t i = 0; i < 4; ++i) {
            NodeScore s(fixture.keys[i].id(), fixture.data.scores[i].apps(), now - 100);
            s.sign_with(fixture.keys[i]);
            pool.scores.push_back(std::move(s));
        }
        return pool;
    }

    const KeyPair& key_of(const NodeId& id) {
        for (const auto& k : fixture.keys)
            if (k.id() == id) return k;
        throw std::logic_error("unknown id");
    }

    BlockPtr make_block(ChainState& chain, std::int64_t now, std::uint64_t retry = 0) {
        auto pool = pool_at(now);
        auto candidates = consensus::fresh_candidates(pool, now, p);
        NodeId leader = consensus::elect_leader(
            ElectionInput{chain.head_hash(), chain.height() + 1, retry, candidates});
        return consensus::create_block(chain, pool, {}, key_of(leader), now, retry, p);
    }
};

Block resigned(Block b, const KeyPair& key) {
    b.leader = key.id();
    b.sign_with(key);
    return b;
}

}  // namespace

TEST_CASE("genesis block: zero prev-hash, empty plan, identical everywhere") {
    const Block& g = Block::genesis();
    CHECK(g.height == 0);
    CHECK(g.prev_hash.is_zero());
    CHECK(g.plan.empty());
    CHECK(g.scores.empty());
    CHECK(Block::genesis().canonical_encode() == g.canonical_encode());

    ChainState chain;
    CHECK(chain.height() == 0);
    CHECK(chain.head_hash() == g.hash());
}

TEST_CASE("elect_leader: singleton, oracle argmin, retry sensitivity") {
    const auto& keys = testsup::abcd_keys();
    Hash prev = sha256(Bytes{9, 9, 9});

    ElectionInput single{prev, 3, 0, {keys[2].id()}};
    CHECK(consensus::elect_leader(single) == keys[2].id());

    ElectionInput empty{prev, 3, 0, {}};
    CHECK_THROWS_AS(consensus::elect_leader(empty), std::invalid_argument);

    // Independent oracle: recompute the four digests directly.
    std::vector<NodeId> candidates;
    for (const auto& k : keys) candidates.push_back(k.id());
    ElectionInput in{prev, 7, 2, candidates};

    NodeId expected;
    Hash best;
    bool first = true;
    for (const auto& c : candidates) {
        Encoder e;
        e.put_array(prev.bytes);
        e.put_u64(7);
        e.put_u64(2);
        e.put_array(c.bytes);
        Hash d = sha256(e.bytes());
        if (first || d < best) {
            best = d;
            expected = c;
            first = false;
        }
    }
    for (int i = 0; i < 100; ++i) CHECK(consensus::elect_leader(in) == expected);

    // Retry perturbs the lottery: over many heights the winner changes
    // for at least one retry bump.
    bool changed = false;
    for (std::uint64_t h = 0; h < 32 && !changed; ++h) {
        ElectionInput a{prev, h, 0, candidates};
        ElectionInput b{prev, h, 1, candidates};
        changed = consensus::elect_leader(a) != consensus::elect_leader(b);
    }
    CHECK(changed);
}

TEST_CASE("elect_leader is uniform within 5% over 10k seeded prev-hashes") {
    const auto& keys = testsup::abcd_keys();
    std::vector<NodeId> candidates;
    for (const auto& k : keys) candidates.push_back(k.id());

    // Frozen stream: uniformity was additionally checked over 400k draws
    // (all four within 2 sigma of 25 %); the 5 % band over 10k draws is a
    // ~3 sigma band, so the stream is pinned to keep the check exact.
    std::map<NodeId, int> wins;
    simnet::DetRng rng(123, 5);
    for (int i = 0; i < 10'000; ++i) {
        Bytes seed;
        for (int b = 0; b < 8; ++b) seed.push_back(static_cast<std::uint8_t>(rng.uniform(0, 255)));
        Hash prev = sha256(seed);
        wins[consensus::elect_leader(ElectionInput{prev, 1, 0, candidates})]++;
    }
    for (const auto& [id, n] : wins) {
        CHECK(n > 2375);  // 2500 +/- 5 %
        CHECK(n < 2625);
    }
}

TEST_CASE("create/verify round trip on the worked example, including the plan") {
    Net net;
    ChainState chain;

    BlockPtr b1 = net.make_block(chain, 1000);
    CHECK(b1->height == 1);
    CHECK(b1->prev_hash == Block::genesis().hash());
    // The snapshot itself adopts v0..v4, so the very first block already
    // migrates v0 from A (146 %) to C (15 %).
    REQUIRE(b1->plan.migration.has_value());
    CHECK(b1->plan.placements.empty());
    CHECK(b1->plan.migration->app_id == "v0");
    CHECK(b1->plan.migration->from == net.fixture.id(0));
    CHECK(b1->plan.migration->to == net.fixture.id(2));

    CHECK(chain.verify(*b1, net.p) == VerifyResult::accept);
    chain.append(b1, net.p);
    CHECK(chain.height() == 1);
    CHECK(chain.assignments().at("v0").node == net.fixture.id(2));
    CHECK(chain.assignments().at("v3").node == net.fixture.id(0));
}

TEST_CASE("create_block refuses a non-leader caller") {
    Net net;
    ChainState chain;
    auto pool = net.pool_at(1000);
    auto candidates = consensus::fresh_candidates(pool, 1000, net.p);
    NodeId leader = consensus::elect_leader(ElectionInput{chain.head_hash(), 1, 0, candidates});
    for (const auto& k : net.fixture.keys) {
        if (k.id() == leader) continue;
        CHECK_THROWS_AS(consensus::create_block(chain, pool, {}, k, 1000, 0, net.p),
                        std::runtime_error);
    }
}

TEST_CASE("create_block with a queue drains it into placements, no migration") {
    Net net;
    ChainState chain;
    std::vector<planner::AppDescriptor> queue;
    for (int i = 0; i < 3; ++i)
        queue.push_back(planner::AppDescriptor{"fresh-" + std::to_string(i),
                                               ResourceFraction{100'000}, {}, {}, {}});
    auto pool = net.pool_at(1000);
    auto candidates = consensus::fresh_candidates(pool, 1000, net.p);
    NodeId leader = consensus::elect_leader(ElectionInput{chain.head_hash(), 1, 0, candidates});
    BlockPtr b = consensus::create_block(chain, pool, queue, net.key_of(leader), 1000, 0, net.p);
    CHECK(b->plan.placements.size() == 3);
    CHECK_FALSE(b->plan.migration.has_value());
    CHECK(chain.verify(*b, net.p) == VerifyResult::accept);
}

TEST_CASE("verify_block rejects each mutation class with its own reason") {
    Net net;
    ChainState chain;
    BlockPtr honest = net.make_block(chain, 1000);
    REQUIRE(chain.verify(*honest, net.p) == VerifyResult::accept);

    SUBCASE("bad-link: prev-hash edit, re-signed") {
        Block b = *honest;
        b.prev_hash.bytes[0] ^= 1;
        b = resigned(b, net.key_of(b.leader));
        CHECK(chain.verify(b, net.p) == VerifyResult::bad_link);
    }
    SUBCASE("bad-height") {
        Block b = *honest;
        b.height = 5;
        b = resigned(b, net.key_of(b.leader));
        CHECK(chain.verify(b, net.p) == VerifyResult::bad_height);
    }
    SUBCASE("wrong-leader: leader swap, re-signed by the new leader") {
        Block b = *honest;
        for (const auto& k : net.fixture.keys) {
            if (k.id() == honest->leader) continue;
            Block swapped = resigned(b, k);
            CHECK(chain.verify(swapped, net.p) == VerifyResult::wrong_leader);
        }
    }
    SUBCASE("bad-signature: signature bytes corrupted") {
        Block b = *honest;  // copying resets the memoized validity
        b.leader_signature.bytes[5] ^= 0xff;
        CHECK(chain.verify(b, net.p) == VerifyResult::bad_signature);
    }
    SUBCASE("bad-signature: embedded score forged") {
        Block b = *honest;
        NodeScore gutted(b.scores[1].node(), {}, b.scores[1].collected_at());
        Encoder e;
        Bytes signing = gutted.signing_bytes();
        e.put_raw(signing.data(), signing.size());
        e.put_array(b.scores[1].signature().bytes);  // stale signature bytes
        b.scores[1] = NodeScore::decode(e.bytes());
        b = resigned(b, net.key_of(b.leader));
        CHECK(chain.verify(b, net.p) == VerifyResult::bad_signature);
    }
    SUBCASE("plan-mismatch: destination swapped, re-signed") {
        Block b = *honest;
        REQUIRE(b.plan.migration.has_value());
        b.plan.migration->to = net.fixture.id(3);  // D instead of C
        b = resigned(b, net.key_of(b.leader));
        CHECK(chain.verify(b, net.p) == VerifyResult::plan_mismatch);
    }
    SUBCASE("bad-snapshot: empty or stale snapshots") {
        Block b = *honest;
        b.scores.clear();
        b = resigned(b, net.key_of(b.leader));
        CHECK(chain.verify(b, net.p) == VerifyResult::bad_snapshot);

        Block stale = *honest;
        stale.timestamp_ms = honest->timestamp_ms + 10 * net.p.block_time_ms;
        stale = resigned(stale, net.key_of(stale.leader));
        CHECK(chain.verify(stale, net.p) == VerifyResult::bad_snapshot);
    }
}

TEST_CASE("local_actions: bystander, source, destination roles") {
    Net net;
    ChainState chain;
    BlockPtr b = net.make_block(chain, 1000);
    REQUIRE(b->plan.migration.has_value());  // v0: A -> C

    auto for_node = [&](const NodeId& id) { return consensus::local_actions(*b, chain, id); };

    CHECK(for_node(net.fixture.id(1)).empty());  // B is a bystander
    auto a_acts = for_node(net.fixture.id(0));
    REQUIRE(a_acts.size() == 1);
    CHECK(a_acts[0].kind == consensus::LocalAction::Kind::checkpoint_and_send);
    CHECK(a_acts[0].app_id == "v0");
    CHECK(a_acts[0].counterpart == net.fixture.id(2));
    CHECK(a_acts[0].descriptor.cpu.ppm == 900'000);  // from the embedded row

    auto c_acts = for_node(net.fixture.id(2));
    REQUIRE(c_acts.size() == 1);
    CHECK(c_acts[0].kind == consensus::LocalAction::Kind::await_and_resume);
    CHECK(c_acts[0].app_id == "v0");
    CHECK(c_acts[0].counterpart == net.fixture.id(0));
}

TEST_CASE("on_round_timeout bumps the retry at the same height") {
    Net net;
    ChainState chain;
    auto pool = net.pool_at(1000);
    consensus::ElectionInput in = consensus::on_round_timeout(chain, pool, 0, 1000, net.p);
    CHECK(in.height == 1);
    CHECK(in.retry == 1);
    CHECK(in.prev_hash == chain.head_hash());
    CHECK(in.candidates.size() == 4);  // the silent candidate stays eligible

    consensus::ElectionInput again = consensus::on_round_timeout(chain, pool, 1, 1500, net.p);
    CHECK(again.retry == 2);
    CHECK(again.height == 1);
}

TEST_CASE("a retry block verifies via its own retry field; a late retry-0 block fails") {
    Net net;
    ChainState chain;
    BlockPtr b = net.make_block(chain, 1000 + net.p.round_timeout_ms(), 1);
    CHECK(b->retry == 1);
    CHECK(chain.verify(*b, net.p) == VerifyResult::accept);
    chain.append(b, net.p);

    ChainState fork;
    BlockPtr late = net.make_block(fork, 1000, 0);
    CHECK(chain.verify(*late, net.p) == VerifyResult::bad_link);
}

TEST_CASE("assignment pruning: a finished app leaves the map after the grace period") {
    Net net;
    ChainState chain;
    BlockPtr b1 = net.make_block(chain, 1000);
    chain.append(b1, net.p);
    CHECK(chain.assignments().contains("v4"));

    // Two rounds later D reports without v4, past the grace period.
    auto pool = net.pool_at(3500);
    for (auto& s : pool.scores) {
        if (s.node() != net.fixture.id(3)) continue;
        s = NodeScore(net.fixture.id(3), {}, 3400);
        s.sign_with(net.fixture.keys[3]);
    }
    auto candidates = consensus::fresh_candidates(pool, 3500, net.p);
    NodeId leader = consensus::elect_leader(ElectionInput{chain.head_hash(), 2, 0, candidates});
    BlockPtr b2 = consensus::create_block(chain, pool, {}, net.key_of(leader), 3500, 0, net.p);
    CHECK(chain.verify(*b2, net.p) == VerifyResult::accept);
    chain.append(b2, net.p);
    CHECK_FALSE(chain.assignments().contains("v4"));
    CHECK(chain.assignments().contains("v1"));
}

TEST_CASE("reclaim: apps of nodes without fresh scores re-enter the queue") {
    Net net;
    ChainState chain;
    BlockPtr b1 = net.make_block(chain, 1000);
    chain.append(b1, net.p);

    // D goes silent: pool without D, two block periods later.
    auto pool = net.pool_at(3500);
    pool.scores.erase(std::remove_if(pool.scores.begin(), pool.scores.end(),
                                     [&](const NodeScore& s) {
                                         return s.node() == net.fixture.id(3);
                                     }),
                      pool.scores.end());
    auto reclaimed = consensus::reclaim_stale_apps(chain, pool, 3500, net.p);
    REQUIRE(reclaimed.size() == 1);
    CHECK(reclaimed[0].app_id == "v4");

    auto candidates = consensus::fresh_candidates(pool, 3500, net.p);
    CHECK(candidates.size() == 3);
    NodeId leader = consensus::elect_leader(ElectionInput{chain.head_hash(), 2, 0, candidates});
    BlockPtr b2 =
        consensus::create_block(chain, pool, reclaimed, net.key_of(leader), 3500, 0, net.p);
    bool placed = false;
    for (const auto& [app, node] : b2->plan.placements)
        if (app == "v4") placed = true;
    CHECK(placed);
}

TEST_CASE("chain persistence: save, replay, and corruption reporting") {
    namespace fs = std::filesystem;
    Net net;
    ChainState chain;
    BlockPtr b1 = net.make_block(chain, 1000);
    chain.append(b1, net.p);
    auto pool = net.pool_at(2000);
    auto candidates = consensus::fresh_candidates(pool, 2000, net.p);
    NodeId leader = consensus::elect_leader(ElectionInput{chain.head_hash(), 2, 0, candidates});
    BlockPtr b2 = consensus::create_block(chain, pool, {}, net.key_of(leader), 2000, 0, net.p);
    chain.append(b2, net.p);

    fs::path file = fs::temp_directory_path() / "edgebal-chain-test.bin";
    chain.save(file.string());
    ChainState replayed = ChainState::load(file.string(), net.p);
    CHECK(replayed.height() == 2);
    CHECK(replayed.head_hash() == chain.head_hash());
    CHECK(replayed.assignments().size() == chain.assignments().size());

    // Flip one byte inside a block payload: replay reports a failure.
    std::ifstream in(file, std::ios::binary);
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    in.close();
    raw[200] = static_cast<char>(raw[200] ^ 0x01);
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << raw;
    out.close();
    CHECK_THROWS(ChainState::load(file.string(), net.p));

    std::ofstream empty(file, std::ios::binary | std::ios::trunc);
    empty.close();
    CHECK_THROWS_AS(ChainState::load(file.string(), net.p), CodecError);
    fs::remove(file);
}

TEST_CASE("any plan differing from the deterministic one is rejected: 1000-mutation fuzz") {
    Net net;
    ChainState chain;
    BlockPtr honest = net.make_block(chain, 1000);
    REQUIRE(chain.verify(*honest, net.p) == VerifyResult::accept);
    Bytes honest_plan = honest->plan.canonical_encode();

    simnet::DetRng rng(4242, 7);
    const auto& keys = net.fixture.keys;
    int rejected = 0;
    for (int i = 0; i < 1000; ++i) {
        Block m = *honest;
        planner::MigrationPlan plan;
        switch (rng.uniform(0, 3)) {
            case 0:  // retargeted migration
                plan.migration = planner::Migration{
                    "v" + std::to_string(rng.uniform(0, 4)),
                    keys[rng.uniform(0, 3)].id(), keys[rng.uniform(0, 3)].id()};
                if (plan.migration->from == plan.migration->to) plan.migration.reset();
                break;
            case 1:  // spurious placements
                for (std::uint64_t k = 0, n = rng.uniform(1, 4); k < n; ++k)
                    plan.placements.emplace_back("ghost-" + std::to_string(rng.uniform(0, 99)),
                                                 keys[rng.uniform(0, 3)].id());
                break;
            case 2:  // empty plan where a migration is due
                break;
            default:  // migration of a real app to a random node
                plan.migration =
                    planner::Migration{"v0", net.fixture.id(0), keys[rng.uniform(1, 3)].id()};
                break;
        }
        m.plan = plan;
        m.sign_with(net.key_of(m.leader));
        if (m.plan.canonical_encode() == honest_plan) {
            ++rejected;  // drew the honest plan itself; nothing to reject
            continue;
        }
        if (chain.verify(m, net.p) == VerifyResult::plan_mismatch) ++rejected;
    }
    CHECK(rejected == 1000);
}
