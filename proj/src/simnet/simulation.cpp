#include "edgebal/simnet/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <unordered_map>
#include <unordered_set>

#include "edgebal/daemon/runtime_adapter.hpp"
#include "edgebal/gossip/gossip.hpp"

namespace edgebal::simnet {

namespace {

std::string make_app_id(int height, int node) {
    // Fixed-width so lexicographic order equals arrival order.
    std::string id = "app-000000-0000";
    for (int i = 0; i < 6; ++i, height /= 10) id[9 - i] = static_cast<char>('0' + height % 10);
    for (int i = 0; i < 4; ++i, node /= 10) id[14 - i] = static_cast<char>('0' + node % 10);
    return id;
}

}  // namespace

std::vector<Arrival> sample_arrivals(DetRng& rng, const SimConfig& config, int block_height) {
    std::vector<Arrival> out;
    for (int node = 0; node < config.node_count; ++node) {
        if (!rng.bernoulli_ppm(config.arrival_prob_ppm)) continue;
        Arrival a;
        a.via_node = node;
        a.descriptor.app_id = make_app_id(block_height, node);
        a.descriptor.cpu = ResourceFraction{
            rng.uniform_i64(config.app_cpu_min_ppm, config.app_cpu_max_ppm)};
        a.duration_blocks = static_cast<int>(
            rng.uniform(static_cast<std::uint64_t>(config.app_duration_min_blocks),
                        static_cast<std::uint64_t>(config.app_duration_max_blocks)));
        out.push_back(std::move(a));
    }
    return out;
}

namespace {

using consensus::Block;
using consensus::BlockPtr;
using consensus::ChainState;
using consensus::ConsensusParams;
using consensus::VerifyResult;
using gossip::GossipNode;
using gossip::ScorePtr;
using gossip::SigKey;
using planner::AppDescriptor;

struct SimNode {
    KeyPair key;
    daemon::MockRuntime runtime;
    std::unique_ptr<GossipNode> gossip;
    ChainState chain;
    bool alive = true;

    explicit SimNode(KeyPair k) : key(std::move(k)) {}
};

struct Event {
    enum class Kind : std::uint8_t {
        tick,
        dynt,
        dynt_reply,
        score,
        score_batch,
        block,
        round_open,
        retry_check,
    };

    std::int64_t at = 0;
    Kind kind = Kind::tick;
    int dst = -1;
    int src = -1;
    SigKey sig{};
    bool wanted = false;
    ScorePtr score;
    BlockPtr block;
    std::uint64_t height = 0;
    std::uint64_t retry = 0;
};

// Millisecond bucket ring. Every schedule delta in the simulation is well
// under the ring span (timeouts are 2 s), so a bucket never holds events
// of two different times. Within a bucket, insertion order is execution
// order, which keeps runs fully deterministic.
class EventRing {
public:
    void push(Event ev) {
        if (ev.at < cursor_) throw std::logic_error("event scheduled in the past");
        if (ev.at - cursor_ >= kSpan) throw std::logic_error("event beyond ring span");
        ring_[static_cast<std::size_t>(ev.at) & (kSpan - 1)].push_back(std::move(ev));
        ++count_;
    }

    // Runs fn over events in time order until drained or fn sets stop.
    template <typename Fn>
    void drain(Fn&& fn, const bool& stop) {
        while (count_ > 0 && !stop) {
            auto& bucket = ring_[static_cast<std::size_t>(cursor_) & (kSpan - 1)];
            // Index loop: handlers may append zero-delay events here.
            std::size_t processed = 0;
            for (std::size_t i = 0; i < bucket.size() && !stop; ++i) {
                Event ev = std::move(bucket[i]);
                ++processed;
                fn(ev);
            }
            count_ -= processed;
            // Buckets are revisited only once per ring lap; letting burst
            // buckets keep their capacity retains every event ever queued.
            if (bucket.capacity() > 512) {
                std::vector<Event>().swap(bucket);
            } else {
                bucket.clear();
            }
            ++cursor_;
        }
    }

private:
    static constexpr std::int64_t kSpan = 4096;  // power of two, > max delta (2s)
    std::array<std::vector<Event>, kSpan> ring_;
    std::int64_t cursor_ = 0;
    std::size_t count_ = 0;
};

struct SimApp {
    AppDescriptor descriptor;
    int remaining_blocks = 0;
    enum class State { queued, running, migrating, done } state = State::queued;
    int node = -1;
};

struct FloodStat {
    std::int64_t origin_time = 0;
    std::int64_t last_delivery = 0;
    std::uint64_t payload_sends = 0;
    std::uint64_t max_node_receptions = 0;
    std::vector<std::uint8_t> received;  // per node: payload reception count
    std::size_t enc_size = 0;
};

class Simulation {
public:
    explicit Simulation(const SimConfig& config)
        : cfg_(config),
          arrivals_rng_(config.seed, 1),
          latency_rng_(config.seed, 2) {
        cfg_.validate();
        params_.block_time_ms = cfg_.block_time_ms;
        params_.planner.migration_enabled = cfg_.migration_enabled;

        std::vector<KeyPair> keys;
        keys.reserve(cfg_.node_count);
        for (int i = 0; i < cfg_.node_count; ++i)
            keys.push_back(KeyPair::from_seed64(cfg_.seed * 1000003ULL + i));

        gossip::GossipConfig gcfg;
        gcfg.delta_st_ms = cfg_.delta_st_ms;
        gcfg.collect_interval_ms = cfg_.collect_interval_ms;

        for (int i = 0; i < cfg_.node_count; ++i) {
            nodes_.push_back(std::make_unique<SimNode>(keys[i]));
            nodes_.back()->gossip = std::make_unique<GossipNode>(nodes_.back()->key, gcfg);
        }
        for (int i = 0; i < cfg_.node_count; ++i) {
            std::vector<NodeId> peers;
            for (int j = 0; j < cfg_.node_count; ++j)
                if (j != i) peers.push_back(nodes_[j]->key.id());
            nodes_[i]->gossip->set_peers(peers);
            index_by_id_[nodes_[i]->key.id()] = i;
        }

        latency_.assign(cfg_.node_count, std::vector<std::int64_t>(cfg_.node_count, 0));
        for (int i = 0; i < cfg_.node_count; ++i)
            for (int j = i + 1; j < cfg_.node_count; ++j)
                latency_[i][j] = latency_[j][i] =
                    latency_rng_.uniform_i64(cfg_.latency_min_ms, cfg_.latency_max_ms);
    }

    SimResult run() {
        for (int i = 0; i < cfg_.node_count; ++i) push_tick(i, 0);
        schedule_round_open(1, cfg_.block_time_ms);

        ring_.drain([this](Event& ev) { dispatch(ev); }, finished_);
        finalize();
        return std::move(result_);
    }

private:
    void push(Event ev) { ring_.push(std::move(ev)); }

    void push_tick(int node, std::int64_t at) {
        Event ev;
        ev.at = at;
        ev.kind = Event::Kind::tick;
        ev.dst = node;
        push(std::move(ev));
    }

    void schedule_round_open(std::uint64_t height, std::int64_t at) {
        if (opened_.contains(height)) return;
        opened_.insert(height);
        Event ev;
        ev.at = at;
        ev.kind = Event::Kind::round_open;
        ev.height = height;
        push(std::move(ev));
    }

    void dispatch(Event& ev) {
        switch (ev.kind) {
            case Event::Kind::tick: on_tick(ev); break;
            case Event::Kind::dynt: on_dynt(ev); break;
            case Event::Kind::dynt_reply: on_dynt_reply(ev); break;
            case Event::Kind::score: on_score(ev); break;
            case Event::Kind::score_batch: on_score_batch(ev); break;
            case Event::Kind::block: on_block(ev); break;
            case Event::Kind::round_open: on_round_open(ev); break;
            case Event::Kind::retry_check: on_retry_check(ev); break;
        }
    }

    // ---- gossip plumbing ----------------------------------------------

    void on_tick(const Event& ev) {
        SimNode& n = *nodes_[ev.dst];
        if (!n.alive) return;
        ScorePtr score = n.gossip->collect_local_state(n.runtime, ev.at);
        std::vector<NodeId> targets = n.gossip->on_timer(ev.at);
        if (!targets.empty()) broadcast_score(ev.dst, score, targets, ev.at);
        push_tick(ev.dst, ev.at + cfg_.collect_interval_ms);
    }

    void broadcast_score(int origin, const ScorePtr& score, const std::vector<NodeId>& targets,
                         std::int64_t now) {
        SigKey sig = SigKey::of(*score);
        FloodStat& stat = flood_[sig];
        if (stat.received.empty()) {
            stat.origin_time = now;
            stat.received.assign(nodes_.size(), 0);
            stat.enc_size = score->canonical_encode().size();
            own_sigs_.emplace(sig, origin);
            ++result_.flood_messages;
        }
        if (cfg_.transport == SimConfig::Transport::direct) {
            // One batched delivery per message: every payload lands within
            // 3x the worst link latency, long before the next round
            // boundary, and pool updates are content-based, so per-edge
            // delivery times are not observable by any protocol decision.
            Event out;
            out.at = now + 3 * cfg_.latency_max_ms;
            out.kind = Event::Kind::score_batch;
            out.src = origin;
            out.score = score;
            messages_ += targets.size();
            payload_bytes_ += stat.enc_size * targets.size();
            stat.payload_sends += targets.size();
            push(std::move(out));
        } else {
            for (const auto& id : targets) send_dynt(origin, index_by_id_.at(id), sig, now);
        }
    }

    void send_dynt(int src, int dst, const SigKey& sig, std::int64_t now) {
        Event ev;
        ev.at = now + latency_[src][dst];
        ev.kind = Event::Kind::dynt;
        ev.dst = dst;
        ev.src = src;
        ev.sig = sig;
        ++messages_;
        push(std::move(ev));
    }

    void on_dynt(const Event& ev) {
        SimNode& n = *nodes_[ev.dst];
        if (!n.alive) return;
        bool want = n.gossip->handle_dynt(ev.sig, nodes_[ev.src]->key.id(), ev.at);
        Event reply;
        reply.at = ev.at + latency_[ev.dst][ev.src];
        reply.kind = Event::Kind::dynt_reply;
        reply.dst = ev.src;
        reply.src = ev.dst;
        reply.sig = ev.sig;
        reply.wanted = want;
        ++messages_;
        push(std::move(reply));
    }

    void on_dynt_reply(const Event& ev) {
        SimNode& n = *nodes_[ev.dst];
        if (!n.alive) return;
        auto payload = n.gossip->handle_dynt_reply(ev.sig, nodes_[ev.src]->key.id(), ev.wanted);
        if (!payload) return;
        auto it = flood_.find(ev.sig);
        Event out;
        out.at = ev.at + latency_[ev.dst][ev.src];
        out.kind = Event::Kind::score;
        out.dst = ev.src;
        out.src = ev.dst;
        out.score = *payload;
        ++messages_;
        if (it != flood_.end()) {
            payload_bytes_ += it->second.enc_size;
            ++it->second.payload_sends;
        }
        push(std::move(out));
    }

    void on_score_batch(const Event& ev) {
        for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
            if (i == ev.src || !nodes_[i]->alive) continue;
            nodes_[i]->gossip->ingest_score(ev.score);
        }
    }

    void on_score(const Event& ev) {
        SimNode& n = *nodes_[ev.dst];
        if (!n.alive) return;
        if (cfg_.transport == SimConfig::Transport::direct) {
            // Exactly-once modeled delivery: no flood bookkeeping needed.
            n.gossip->ingest_score(ev.score);
            return;
        }
        SigKey sig = SigKey::of(*ev.score);
        auto it = flood_.find(sig);
        if (it != flood_.end()) {
            auto& cnt = it->second.received[static_cast<std::size_t>(ev.dst)];
            if (cnt < 255) ++cnt;
            it->second.max_node_receptions =
                std::max<std::uint64_t>(it->second.max_node_receptions, cnt);
            it->second.last_delivery = std::max(it->second.last_delivery, ev.at);
        }
        std::vector<NodeId> forward =
            n.gossip->handle_score(ev.score, nodes_[ev.src]->key.id(), ev.at);
        for (const auto& id : forward) send_dynt(ev.dst, index_by_id_.at(id), sig, ev.at);
    }

    // ---- consensus rounds ---------------------------------------------

    void on_round_open(const Event& ev) {
        std::uint64_t h = ev.height;
        if (h > 1) close_round(h - 1);
        if (h > static_cast<std::uint64_t>(cfg_.blocks)) {
            finished_ = true;
            return;
        }
        round_open_time_[h] = ev.at;

        for (const auto& a : sample_arrivals(arrivals_rng_, cfg_, static_cast<int>(h))) {
            SimApp app;
            app.descriptor = a.descriptor;
            app.remaining_blocks = a.duration_blocks;
            if (cfg_.skew_arrivals) {
                app.state = SimApp::State::running;
                app.node = 0;
                nodes_[0]->runtime.start(a.descriptor);
            } else {
                app.state = SimApp::State::queued;
                waiting_.push_back(a.descriptor);
            }
            apps_.emplace(a.descriptor.app_id, std::move(app));
        }

        attempt_production(h, 0, ev.at);

        Event retry;
        retry.at = ev.at + params_.round_timeout_ms();
        retry.kind = Event::Kind::retry_check;
        retry.height = h;
        retry.retry = 1;
        push(std::move(retry));
    }

    void on_retry_check(const Event& ev) {
        if (max_height_ >= ev.height) return;
        attempt_production(ev.height, ev.retry, ev.at);
        Event retry;
        retry.at = ev.at + params_.round_timeout_ms();
        retry.kind = Event::Kind::retry_check;
        retry.height = ev.height;
        retry.retry = ev.retry + 1;
        if (ev.retry > nodes_.size() + 3)
            throw std::runtime_error("simulation livelock: no leader able to produce");
        push(std::move(retry));
    }

    void attempt_production(std::uint64_t height, std::uint64_t retry, std::int64_t now) {
        for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
            SimNode& n = *nodes_[i];
            if (!n.alive || n.chain.height() + 1 != height) continue;
            auto candidates = n.gossip->fresh_ids(now, params_.freshness_ms());
            if (candidates.empty()) continue;
            // Synced nodes evaluate identical lotteries; compute once and
            // reuse while the inputs match.
            NodeId winner;
            if (election_cache_.valid && election_cache_.height == height &&
                election_cache_.retry == retry && election_cache_.prev == n.chain.head_hash() &&
                election_cache_.candidates == candidates) {
                winner = election_cache_.winner;
            } else {
                consensus::ElectionInput in{n.chain.head_hash(), height, retry, candidates};
                winner = consensus::elect_leader(in);
                election_cache_ = {height, retry, n.chain.head_hash(), candidates, winner, true};
            }
            if (winner != n.key.id()) continue;

            if (cfg_.crash_leader_at_height == static_cast<int>(height) && retry == 0) {
                crash_node(i, now);
                continue;
            }

            auto pool = n.gossip->pool_view();
            BlockPtr block = consensus::create_block(n.chain, pool, admit(pool), n.key, now,
                                                     retry, params_);
            if (!block_time_.contains(height)) {
                block_time_[height] = now;
                schedule_round_open(height + 1, now + cfg_.block_time_ms);
            }
            accept_block(i, block);
            for (int j = 0; j < static_cast<int>(nodes_.size()); ++j) {
                if (j == i) continue;
                send_block(i, j, block, now);
            }
        }
    }

    // Admit waiting apps while the mean reported load is at or under the
    // threshold; the admission that crosses it still goes through, which
    // is exactly how the system's load ever rises above the threshold.
    std::vector<AppDescriptor> admit(const consensus::ScorePoolView& pool) {
        std::vector<AppDescriptor> admitted;
        if (pool.scores.empty()) return admitted;
        std::int64_t total = 0;
        for (const auto& s : pool.scores) total += planner::node_load(s, params_.planner.weights);
        auto count = static_cast<std::int64_t>(pool.scores.size());
        std::size_t taken = 0;
        while (taken < waiting_.size()) {
            if (total / count > cfg_.admission_threshold_ppm) break;
            total += planner::app_load(waiting_[taken], params_.planner.weights);
            ++taken;
        }
        admitted.assign(waiting_.begin(), waiting_.begin() + static_cast<std::ptrdiff_t>(taken));
        return admitted;
    }

    void send_block(int src, int dst, const BlockPtr& block, std::int64_t now) {
        Event ev;
        ev.at = now + latency_[src][dst];
        ev.kind = Event::Kind::block;
        ev.dst = dst;
        ev.src = src;
        ev.block = block;
        ++messages_;
        push(std::move(ev));
    }

    void on_block(const Event& ev) {
        SimNode& n = *nodes_[ev.dst];
        if (!n.alive) return;
        if (seen_block(ev.dst, ev.block->hash())) return;
        VerifyResult r = n.chain.verify(*ev.block, params_);
        if (r != VerifyResult::accept) {
            ++result_.rejected_blocks;
            if (r == VerifyResult::bad_height || r == VerifyResult::bad_link)
                if (ev.block->height <= n.chain.height()) ++result_.equivocations;
            return;
        }
        accept_block(ev.dst, ev.block);
        if (cfg_.transport == SimConfig::Transport::flooded) {
            for (int j = 0; j < static_cast<int>(nodes_.size()); ++j)
                if (j != ev.dst && j != ev.src) send_block(ev.dst, j, ev.block, ev.at);
        }
    }

    bool seen_block(int node, const Hash& h) {
        if (seen_blocks_.empty()) seen_blocks_.resize(nodes_.size());
        return !seen_blocks_[static_cast<std::size_t>(node)].insert(h).second;
    }

    void accept_block(int node_index, const BlockPtr& block) {
        SimNode& n = *nodes_[node_index];
        seen_block(node_index, block->hash());
        auto actions = consensus::local_actions(*block, n.chain, n.key.id());
        n.chain.append(block, params_);
        max_height_ = std::max(max_height_, block->height);

        bool first_acceptance = !applied_.contains(block->hash());
        if (first_acceptance) {
            applied_.insert(block->hash());
            migrations_by_height_[block->height] += block->plan.migration ? 1 : 0;
            result_.migrations_total += block->plan.migration ? 1 : 0;
            for (const auto& [app_id, node] : block->plan.placements) {
                std::erase_if(waiting_,
                              [&](const AppDescriptor& a) { return a.app_id == app_id; });
            }
            if (block->plan.migration) {
                auto it = apps_.find(block->plan.migration->app_id);
                if (it != apps_.end() && it->second.state == SimApp::State::running)
                    it->second.state = SimApp::State::migrating;
            }
        }

        for (const auto& act : actions) {
            switch (act.kind) {
                case consensus::LocalAction::Kind::start: {
                    n.runtime.start(act.descriptor);
                    auto it = apps_.find(act.app_id);
                    if (it != apps_.end()) {
                        it->second.state = SimApp::State::running;
                        it->second.node = node_index;
                    }
                    break;
                }
                case consensus::LocalAction::Kind::checkpoint_and_send: {
                    // Pause/dump/remove; the transfer itself is the
                    // destination's await_and_resume in the same round.
                    try {
                        n.runtime.pause(act.app_id);
                        (void)n.runtime.dump(act.app_id);
                        n.runtime.remove(act.app_id);
                    } catch (const std::exception&) {
                        // App already gone locally; the ledger view wins.
                    }
                    break;
                }
                case consensus::LocalAction::Kind::await_and_resume: {
                    n.runtime.start(act.descriptor);
                    auto it = apps_.find(act.app_id);
                    if (it != apps_.end()) {
                        it->second.state = SimApp::State::running;
                        it->second.node = node_index;
                    }
                    break;
                }
            }
        }
    }

    void crash_node(int index, std::int64_t now) {
        nodes_[index]->alive = false;
        result_.crashed_node = nodes_[index]->key.id();
        (void)now;
    }

    // ---- lifecycle and metrics ----------------------------------------

    void close_round(std::uint64_t height) {
        MetricsRow row;
        row.height = height;
        row.node_load_ppm.assign(nodes_.size(), -1);

        std::int64_t total = 0;
        std::int64_t live = 0;
        for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
            if (!nodes_[i]->alive) continue;
            std::int64_t load = 0;
            for (const auto& a : nodes_[i]->runtime.list_apps()) load += a.cpu.ppm;
            row.node_load_ppm[i] = load;
            total += load;
            ++live;
        }
        row.mean_load_ppm = live > 0 ? total / live : 0;

        double mean = live > 0 ? static_cast<double>(total) / static_cast<double>(live) : 0.0;
        double acc = 0.0;
        for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
            if (row.node_load_ppm[i] < 0) continue;
            double d = static_cast<double>(row.node_load_ppm[i]) - mean;
            acc += d * d;
        }
        double stddev_ppm = live > 0 ? std::sqrt(acc / static_cast<double>(live)) : 0.0;
        row.stddev_load = stddev_ppm / 1e6;

        row.queue_len = waiting_.size();
        std::int64_t apps_cpu_total = 0;
        for (const auto& [id, app] : apps_) {
            if (app.state != SimApp::State::running || app.node < 0 ||
                !nodes_[static_cast<std::size_t>(app.node)]->alive)
                continue;
            ++row.running_apps;
            apps_cpu_total += app.descriptor.cpu.ppm;
        }
        if (apps_cpu_total != total) result_.conservation_ok = false;
        row.migrations = migrations_by_height_[height];
        row.messages_sent = messages_ - messages_at_last_close_;
        row.payload_bytes = payload_bytes_ - payload_at_last_close_;
        messages_at_last_close_ = messages_;
        payload_at_last_close_ = payload_bytes_;
        result_.metrics.rows.push_back(std::move(row));

        // Lifetimes tick down only while actually running on a live node.
        for (auto& [id, app] : apps_) {
            if (app.state != SimApp::State::running || app.node < 0 ||
                !nodes_[app.node]->alive)
                continue;
            if (--app.remaining_blocks <= 0) {
                nodes_[app.node]->runtime.remove(id);
                app.state = SimApp::State::done;
            }
        }
    }

    void finalize() {
        result_.final_height = max_height_;
        result_.messages_total = messages_;
        result_.payload_bytes_total = payload_bytes_;

        const Hash* head = nullptr;
        for (const auto& n : nodes_) {
            if (!n->alive) continue;
            if (!head) {
                head = &n->chain.head_hash();
            } else if (*head != n->chain.head_hash()) {
                result_.chains_identical = false;
            }
        }
        result_.chain = nodes_[0]->chain.blocks();

        // Flood completeness: a message had enough time iff it was
        // originated at least a second before the run ended.
        std::int64_t horizon =
            result_.metrics.rows.empty() ? 0 : round_open_time_[max_height_] - 1000;
        for (const auto& [sig, stat] : flood_) {
            result_.max_payload_receptions =
                std::max(result_.max_payload_receptions, stat.max_node_receptions);
            result_.max_payload_transmissions =
                std::max(result_.max_payload_transmissions, stat.payload_sends);
            if (stat.origin_time > horizon) continue;
            bool complete = true;
            for (int i = 0; i < static_cast<int>(nodes_.size()); ++i) {
                if (!nodes_[i]->alive) continue;
                bool got = stat.received[static_cast<std::size_t>(i)] > 0;
                if (!got && !is_own_message(i, sig)) {
                    ++result_.flood_incomplete;
                    complete = false;
                    break;
                }
            }
            if (complete)
                result_.max_flood_latency_ms = std::max(result_.max_flood_latency_ms,
                                                        stat.last_delivery - stat.origin_time);
        }

        if (cfg_.crash_leader_at_height > 0) {
            auto h = static_cast<std::uint64_t>(cfg_.crash_leader_at_height);
            if (block_time_.contains(h) && block_time_.contains(h - 1))
                result_.crash_height_delay_ms =
                    (block_time_[h] - block_time_[h - 1]) - cfg_.block_time_ms;
        }
    }

    bool is_own_message(int node, const SigKey& sig) {
        // A node never floods to itself; any message it originated counts
        // as delivered to it.
        auto it = own_sigs_.find(sig);
        return it != own_sigs_.end() && it->second == node;
    }

    SimConfig cfg_;
    ConsensusParams params_;
    DetRng arrivals_rng_;
    DetRng latency_rng_;

    std::vector<std::unique_ptr<SimNode>> nodes_;
    std::unordered_map<NodeId, int> index_by_id_;
    std::vector<std::vector<std::int64_t>> latency_;

    EventRing ring_;
    bool finished_ = false;

    std::vector<AppDescriptor> waiting_;
    std::map<std::string, SimApp> apps_;

    std::unordered_set<std::uint64_t> opened_;
    std::map<std::uint64_t, std::int64_t> round_open_time_;
    std::map<std::uint64_t, std::int64_t> block_time_;
    std::map<std::uint64_t, std::uint64_t> migrations_by_height_;
    std::uint64_t max_height_ = 0;

    struct ElectionCache {
        std::uint64_t height = 0;
        std::uint64_t retry = 0;
        Hash prev;
        std::vector<NodeId> candidates;
        NodeId winner;
        bool valid = false;
    };
    ElectionCache election_cache_;

    std::unordered_map<SigKey, FloodStat, gossip::SigKeyHash> flood_;
    std::unordered_map<SigKey, int, gossip::SigKeyHash> own_sigs_;
    std::vector<std::unordered_set<Hash>> seen_blocks_;
    std::unordered_set<Hash> applied_;

    std::uint64_t messages_ = 0;
    std::uint64_t payload_bytes_ = 0;
    std::uint64_t messages_at_last_close_ = 0;
    std::uint64_t payload_at_last_close_ = 0;

    SimResult result_;
};

}  // namespace

SimResult run(const SimConfig& config) {
    Simulation sim(config);
    return sim.run();
}

SimResult baseline_run(SimConfig config) {
    config.migration_enabled = false;
    return run(config);
}

}  // namespace edgebal::simnet
