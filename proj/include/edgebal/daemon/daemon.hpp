#pragma once

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "edgebal/consensus/consensus.hpp"
#include "edgebal/daemon/docs.hpp"
#include "edgebal/daemon/runtime_adapter.hpp"
#include "edgebal/gossip/gossip.hpp"

namespace edgebal::daemon {

struct DaemonConfig {
    std::string listen_host = "127.0.0.1";
    int listen_port = 0;  // 0 picks a free port
    std::array<std::uint8_t, 32> key_seed{};
    std::vector<std::string> peer_addrs;  // "host:port"

    std::int64_t block_time_ms = 1000;
    std::int64_t delta_st_ms = 500;
    std::int64_t collect_interval_ms = 500;
    std::int64_t admission_threshold_ppm = 900'000;

    std::string chain_file;  // empty disables persistence
    std::vector<planner::AppDescriptor> initial_apps;
    bool log_events = true;
    // Observer mode: gossip and verify but never lead a round.
    bool produce_blocks = true;
};

// One deployable node: a single event loop owns all protocol state; the
// REST surface and the wire receipts enqueue work into it; outbound HTTP
// happens on sender threads so the loop never blocks on the network.
class Daemon {
public:
    explicit Daemon(DaemonConfig config);
    ~Daemon();

    Daemon(const Daemon&) = delete;
    Daemon& operator=(const Daemon&) = delete;

    void start();
    void stop();  // graceful: drains, flushes the chain file

    [[nodiscard]] const NodeId& id() const { return key_.id(); }
    [[nodiscard]] int port() const { return port_; }
    [[nodiscard]] std::string address() const {
        return cfg_.listen_host + ":" + std::to_string(port_);
    }

    // Serialized snapshots for tests and the CLI.
    std::uint64_t chain_height();
    Hash chain_head();
    std::vector<std::string> running_app_ids();

    // Operator-facing migration entry point: no-op when `to` is
    // this node, otherwise checkpoint, transfer, resume remotely, remove
    // locally; on transfer failure the app resumes locally.
    void migrate_app(const std::string& app_id, const NodeId& to);

private:
    struct Peer {
        std::string addr;
        std::optional<NodeId> node;
        std::int64_t last_ok_ms = 0;
        std::int64_t rtt_ewma_ms = 0;
    };

    struct SendJob {
        enum class Kind { dynt, score, block, depart, migrate, chain_pull } kind;
        std::string addr;
        Bytes body;
        gossip::ScorePtr payload;       // dynt/handshake: payload to ship
        std::uint64_t from_height = 0;  // chain_pull
        std::string app_id;             // migrate
        Bytes blob;                     // migrate rollback context
    };

    // loop plumbing
    void loop_main();
    void post(std::function<void()> task);
    template <typename T>
    T call(std::function<T()> fn);
    void run_timers(std::int64_t now);
    static std::int64_t now_ms();

    // protocol steps (loop thread only)
    void collect_and_broadcast(std::int64_t now);
    void try_produce(std::int64_t now);
    void accept_block(const consensus::BlockPtr& block, const std::string& from_addr);
    void handle_wire(const Bytes& body, const std::string& from_id_hex,
                     const std::string& from_addr, std::string& dynt_reply);
    void apply_departure(const DepartureNote& note);
    void broadcast_block(const consensus::BlockPtr& block, const std::string& except_addr);
    void pull_chain(const std::string& addr, std::uint64_t from_height);
    void start_migration(const std::string& app_id, const NodeId& to);
    std::vector<planner::AppDescriptor> admitted_queue();
    Peer* peer_by_id(const NodeId& id);
    void note_peer(const std::string& id_hex, const std::string& addr);
    void touch_peer(const std::string& addr, std::int64_t rtt);
    void enqueue_send(SendJob job);
    void sender_main();
    void log(const std::string& event, const std::string& detail);

    // HTTP handlers (server threads; marshal into the loop)
    void setup_routes();
    std::string node_representation();

    DaemonConfig cfg_;
    KeyPair key_;
    MockRuntime runtime_;
    std::unique_ptr<gossip::GossipNode> gossip_;
    consensus::ChainState chain_;
    consensus::ConsensusParams params_;

    std::vector<Peer> peers_;
    std::vector<planner::AppDescriptor> waiting_;
    std::unordered_set<gossip::SigKey, gossip::SigKeyHash> seen_departures_;
    std::unordered_map<NodeId, std::int64_t> departed_ms_;
    std::pair<std::uint64_t, std::uint64_t> produced_{0, 0};  // (height, retry)
    std::int64_t next_collect_ = 0;
    std::int64_t started_at_ = 0;

    std::atomic<bool> running_{false};
    std::thread loop_thread_;
    std::mutex mu_;
    std::condition_variable cv_;
    std::deque<std::function<void()>> tasks_;

    std::vector<std::thread> senders_;
    std::mutex send_mu_;
    std::condition_variable send_cv_;
    std::deque<SendJob> send_queue_;

    struct HttpState;
    std::unique_ptr<HttpState> http_;
    int port_ = 0;
};

}  // namespace edgebal::daemon
