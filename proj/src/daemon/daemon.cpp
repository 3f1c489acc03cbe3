#include "edgebal/daemon/daemon.hpp"

#include <httplib.h>
#include <json.hpp>

#include <chrono>
#include <filesystem>
#include <future>
#include <iostream>

namespace edgebal::daemon {

namespace {

enum class WireKind : std::uint8_t { dynt = 1, score = 3, block = 4, depart = 5 };

constexpr int kConnectTimeoutMs = 500;
constexpr int kReadTimeoutMs = 2000;

httplib::Client make_client(const std::string& addr) {
    httplib::Client cli("http://" + addr);
    cli.set_connection_timeout(0, kConnectTimeoutMs * 1000);
    cli.set_read_timeout(kReadTimeoutMs / 1000, (kReadTimeoutMs % 1000) * 1000);
    return cli;
}

std::string body_of(const Bytes& b) {
    return {reinterpret_cast<const char*>(b.data()), b.size()};
}

}  // namespace

struct Daemon::HttpState {
    httplib::Server server;
    std::thread thread;
    std::atomic<bool> accepting{false};
};

Daemon::Daemon(DaemonConfig config)
    : cfg_(std::move(config)), key_(KeyPair::from_seed(cfg_.key_seed)) {
    params_.block_time_ms = cfg_.block_time_ms;

    gossip::GossipConfig gcfg;
    gcfg.delta_st_ms = cfg_.delta_st_ms;
    gcfg.collect_interval_ms = cfg_.collect_interval_ms;
    gossip_ = std::make_unique<gossip::GossipNode>(key_, gcfg);

    for (const auto& addr : cfg_.peer_addrs) peers_.push_back(Peer{addr, std::nullopt, 0, 0});
    for (const auto& app : cfg_.initial_apps) runtime_.start(app);

    if (!cfg_.chain_file.empty() && std::filesystem::exists(cfg_.chain_file) &&
        std::filesystem::file_size(cfg_.chain_file) > 0)
        chain_ = consensus::ChainState::load(cfg_.chain_file, params_);

    http_ = std::make_unique<HttpState>();
}

Daemon::~Daemon() { stop(); }

std::int64_t Daemon::now_ms() {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void Daemon::log(const std::string& event, const std::string& detail) {
    if (!cfg_.log_events) return;
    std::string line = "ts=" + std::to_string(now_ms()) + " node=" + key_.id().hex().substr(0, 8) +
                       " event=" + event;
    if (!detail.empty()) line += " " + detail;
    line += "\n";
    std::cerr << line;
}

void Daemon::start() {
    if (running_.exchange(true)) return;

    setup_routes();
    if (cfg_.listen_port == 0) {
        port_ = http_->server.bind_to_any_port(cfg_.listen_host);
    } else {
        port_ = cfg_.listen_port;
        if (!http_->server.bind_to_port(cfg_.listen_host, port_))
            throw std::runtime_error("cannot bind " + cfg_.listen_host + ":" +
                                     std::to_string(port_));
    }
    if (!cfg_.chain_file.empty() && !std::filesystem::exists(cfg_.chain_file))
        chain_.save(cfg_.chain_file);
    std::uint64_t height = chain_.height();

    http_->accepting = true;
    http_->thread = std::thread([this] { http_->server.listen_after_bind(); });
    for (int i = 0; i < 2; ++i) senders_.emplace_back([this] { sender_main(); });
    loop_thread_ = std::thread([this] { loop_main(); });

    log("started", "addr=" + address() + " height=" + std::to_string(height));
}

void Daemon::stop() {
    if (!running_.exchange(false)) return;
    // Order matters: refuse new API work, drain in-flight handlers while
    // the loop still serves them, then stop senders and the loop itself.
    http_->accepting = false;
    http_->server.stop();
    if (http_->thread.joinable()) http_->thread.join();

    {
        std::lock_guard lk(send_mu_);
        send_queue_.clear();
    }
    send_cv_.notify_all();
    for (auto& t : senders_)
        if (t.joinable()) t.join();
    senders_.clear();

    cv_.notify_all();
    if (loop_thread_.joinable()) loop_thread_.join();

    if (!cfg_.chain_file.empty()) chain_.save(cfg_.chain_file);
    log("stopped", "height=" + std::to_string(chain_.height()));
}

void Daemon::post(std::function<void()> task) {
    {
        std::lock_guard lk(mu_);
        tasks_.push_back(std::move(task));
    }
    cv_.notify_one();
}

template <typename T>
T Daemon::call(std::function<T()> fn) {
    if (!http_->accepting && !running_) throw std::runtime_error("daemon is stopping");
    auto task = std::make_shared<std::packaged_task<T()>>(std::move(fn));
    auto fut = task->get_future();
    post([task] { (*task)(); });
    return fut.get();
}

void Daemon::loop_main() {
    started_at_ = now_ms();
    next_collect_ = started_at_;
    while (running_) {
        std::function<void()> task;
        {
            std::unique_lock lk(mu_);
            auto deadline = std::chrono::system_clock::time_point(
                std::chrono::milliseconds(std::min(next_collect_, now_ms() + 50)));
            cv_.wait_until(lk, deadline, [&] { return !tasks_.empty() || !running_; });
            if (!tasks_.empty()) {
                task = std::move(tasks_.front());
                tasks_.pop_front();
            }
        }
        if (task) task();
        run_timers(now_ms());
    }
    // Drain remaining calls so no handler is left waiting on a promise.
    std::lock_guard lk(mu_);
    for (auto& t : tasks_) t();
    tasks_.clear();
}

void Daemon::run_timers(std::int64_t now) {
    if (now >= next_collect_) {
        collect_and_broadcast(now);
        next_collect_ = now + cfg_.collect_interval_ms;
    }
    try_produce(now);
}

// ---- gossip ------------------------------------------------------------

void Daemon::collect_and_broadcast(std::int64_t now) {
    gossip::ScorePtr score = gossip_->collect_local_state(runtime_, now);
    std::vector<NodeId> due = gossip_->on_timer(now);
    bool announce = !due.empty() || gossip_->peers().empty();
    if (!announce) return;

    gossip::SigKey sig = gossip::SigKey::of(*score);
    Bytes dynt;
    dynt.push_back(static_cast<std::uint8_t>(WireKind::dynt));
    dynt.insert(dynt.end(), sig.bytes.begin(), sig.bytes.end());

    for (auto& p : peers_) {
        if (p.node) {
            enqueue_send({SendJob::Kind::dynt, p.addr, dynt, score, 0, {}, {}});
        } else {
            // Unresolved peer: introduce ourselves through the node API and
            // learn its id from the representation.
            enqueue_send({SendJob::Kind::chain_pull, p.addr, {}, score, chain_.height() + 1, {}, {}});
        }
    }
}

void Daemon::handle_wire(const Bytes& body, const std::string& from_id_hex,
                         const std::string& from_addr, std::string& dynt_reply) {
    if (body.empty()) return;
    NodeId from;
    if (from_id_hex.size() == 64) from = NodeId::from_hex(from_id_hex);
    if (!from.is_zero() && !from_addr.empty()) note_peer(from_id_hex, from_addr);

    auto kind = static_cast<WireKind>(body[0]);
    std::span<const std::uint8_t> payload(body.data() + 1, body.size() - 1);
    std::int64_t now = now_ms();

    switch (kind) {
        case WireKind::dynt: {
            if (payload.size() != 64) return;
            gossip::SigKey sig;
            std::copy(payload.begin(), payload.end(), sig.bytes.begin());
            dynt_reply = gossip_->handle_dynt(sig, from, now) ? "1" : "0";
            break;
        }
        case WireKind::score: {
            gossip::ScorePtr score;
            try {
                score = std::make_shared<const NodeScore>(NodeScore::decode(payload));
            } catch (const CodecError&) {
                return;
            }
            auto departed = departed_ms_.find(score->node());
            if (departed != departed_ms_.end()) {
                // Suppress the departed node's in-flight reports for one
                // block period; anything later is a genuine rejoin.
                if (score->collected_at() <= departed->second + cfg_.block_time_ms) return;
                departed_ms_.erase(departed);
            }
            std::vector<NodeId> forward = gossip_->handle_score(score, from, now);
            gossip::SigKey sig = gossip::SigKey::of(*score);
            Bytes dynt;
            dynt.push_back(static_cast<std::uint8_t>(WireKind::dynt));
            dynt.insert(dynt.end(), sig.bytes.begin(), sig.bytes.end());
            for (const auto& id : forward)
                if (Peer* p = peer_by_id(id)) enqueue_send({SendJob::Kind::dynt, p->addr, dynt, score, 0, {}, {}});
            break;
        }
        case WireKind::block: {
            try {
                auto block =
                    std::make_shared<const consensus::Block>(consensus::Block::decode(payload));
                accept_block(block, from_addr);
            } catch (const CodecError&) {
            }
            break;
        }
        case WireKind::depart: {
            try {
                DepartureNote note = DepartureNote::decode(payload);
                gossip::SigKey sig{note.signature.bytes};
                if (seen_departures_.contains(sig)) return;
                seen_departures_.insert(sig);
                if (!note.signature_valid()) return;
                apply_departure(note);
                Bytes wire;
                wire.push_back(static_cast<std::uint8_t>(WireKind::depart));
                Bytes enc = note.canonical_encode();
                wire.insert(wire.end(), enc.begin(), enc.end());
                for (auto& p : peers_)
                    if (p.addr != from_addr) enqueue_send({SendJob::Kind::depart, p.addr, wire, nullptr, 0, {}, {}});
            } catch (const CodecError&) {
            }
            break;
        }
    }
}

void Daemon::apply_departure(const DepartureNote& note) {
    gossip_->remove_from_pool(note.node);
    gossip_->remove_peer(note.node);
    departed_ms_[note.node] = note.timestamp_ms;
    std::erase_if(peers_, [&](const Peer& p) { return p.node && *p.node == note.node; });
    log("departure", "node=" + note.node.hex().substr(0, 8));
}

// ---- consensus -----------------------------------------------------------

std::vector<planner::AppDescriptor> Daemon::admitted_queue() {
    auto pool = gossip_->pool_view();
    std::vector<planner::AppDescriptor> admitted;
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

void Daemon::try_produce(std::int64_t now) {
    if (!cfg_.produce_blocks) return;
    // Joining a network: let gossip and chain sync settle before trying to
    // lead, or freshly started daemons mint diverging first blocks.
    if (!cfg_.peer_addrs.empty() && now - started_at_ < 2 * cfg_.block_time_ms) return;

    std::uint64_t retry;
    std::int64_t into_window;
    std::uint64_t height = chain_.height() + 1;
    if (chain_.height() == 0) {
        // The genesis timestamp is a fixed epoch; anchor the first round
        // on wall-clock windows so co-starting daemons agree on the retry
        // counter instead of racing one lottery per millisecond.
        retry = static_cast<std::uint64_t>(now / params_.round_timeout_ms());
        into_window = now % params_.round_timeout_ms();
    } else {
        std::int64_t due = chain_.head().timestamp_ms + cfg_.block_time_ms;
        if (now < due) return;
        retry = static_cast<std::uint64_t>((now - due) / params_.round_timeout_ms());
        into_window = (now - due) % params_.round_timeout_ms();
    }
    // At a retry-window boundary two different winners could produce
    // before either block lands; give the previous window's block a
    // moment to arrive.
    if (retry > 0 && into_window < 100) return;
    if (produced_ == std::pair{height, retry}) return;

    auto pool = gossip_->pool_view();
    auto candidates = consensus::fresh_candidates(pool, now, params_);
    if (candidates.empty()) return;
    consensus::ElectionInput in{chain_.head_hash(), height, retry, candidates};
    if (consensus::elect_leader(in) != key_.id()) return;
    produced_ = {height, retry};

    auto block = consensus::create_block(chain_, pool, admitted_queue(), key_, now, retry, params_);
    log("produced", "height=" + std::to_string(height) + " retry=" + std::to_string(retry));
    accept_block(block, "");
}

void Daemon::accept_block(const consensus::BlockPtr& block, const std::string& from_addr) {
    if (block->height <= chain_.height()) return;
    if (block->height > chain_.height() + 1) {
        if (!from_addr.empty()) pull_chain(from_addr, chain_.height() + 1);
        return;
    }
    consensus::VerifyResult r = chain_.verify(*block, params_);
    if (r != consensus::VerifyResult::accept) {
        log("rejected", std::string("reason=") + consensus::to_string(r) +
                            " height=" + std::to_string(block->height));
        return;
    }

    auto actions = consensus::local_actions(*block, chain_, key_.id());
    chain_.append(block, params_);
    if (!cfg_.chain_file.empty()) consensus::ChainState::append_to_file(cfg_.chain_file, *block);

    for (const auto& [app_id, node] : block->plan.placements)
        std::erase_if(waiting_, [&](const auto& a) { return a.app_id == app_id; });

    for (const auto& act : actions) {
        switch (act.kind) {
            case consensus::LocalAction::Kind::start:
                runtime_.start(act.descriptor);
                log("app_started", "app=" + act.app_id);
                break;
            case consensus::LocalAction::Kind::checkpoint_and_send:
                start_migration(act.app_id, act.counterpart);
                break;
            case consensus::LocalAction::Kind::await_and_resume:
                // Nothing active: the source pushes the context via POST /migrate.
                break;
        }
    }

    log("accepted", "height=" + std::to_string(block->height) +
                        " head=" + block->hash().hex().substr(0, 12));
    broadcast_block(block, from_addr);
}

void Daemon::broadcast_block(const consensus::BlockPtr& block, const std::string& except_addr) {
    Bytes wire;
    wire.push_back(static_cast<std::uint8_t>(WireKind::block));
    Bytes enc = block->canonical_encode();
    wire.insert(wire.end(), enc.begin(), enc.end());
    for (auto& p : peers_)
        if (p.addr != except_addr) enqueue_send({SendJob::Kind::block, p.addr, wire, nullptr, 0, {}, {}});
}

void Daemon::pull_chain(const std::string& addr, std::uint64_t from_height) {
    enqueue_send({SendJob::Kind::chain_pull, addr, {}, gossip_->own_score(), from_height, {}, {}});
}

// ---- migration -----------------------------------------------------------

void Daemon::start_migration(const std::string& app_id, const NodeId& to) {
    Bytes blob;
    planner::AppDescriptor desc;
    try {
        runtime_.pause(app_id);
        blob = runtime_.dump(app_id);
        Decoder d{std::span<const std::uint8_t>(blob)};
        desc = planner::AppDescriptor::decode_from(d);
    } catch (const std::exception& e) {
        log("migrate_skip", "app=" + app_id + " reason=" + e.what());
        return;
    }

    Peer* p = peer_by_id(to);
    if (!p) {
        runtime_.resume(app_id, blob);
        log("migrate_rollback", "app=" + app_id + " reason=unknown-peer");
        return;
    }

    nlohmann::json doc{{"app_id", app_id},
                       {"descriptor",
                        {{"app_id", desc.app_id},
                         {"cpu_ppm", desc.cpu.ppm},
                         {"ram_ppm", desc.ram.ppm},
                         {"disk_ppm", desc.disk.ppm},
                         {"network_ppm", desc.network.ppm}}},
                       {"context", base64_encode(blob)}};
    std::string body = doc.dump();
    SendJob job{SendJob::Kind::migrate, p->addr, Bytes(body.begin(), body.end()), nullptr, 0, {}, {}};
    job.app_id = app_id;
    job.blob = blob;
    enqueue_send(std::move(job));
    log("migrate_begin", "app=" + app_id + " to=" + to.hex().substr(0, 8));
}

void Daemon::migrate_app(const std::string& app_id, const NodeId& to) {
    if (to == key_.id()) return;  // migration to self completes trivially
    call<bool>([this, app_id, to] {
        start_migration(app_id, to);
        return true;
    });
}

// ---- peers / senders -------------------------------------------------------

Daemon::Peer* Daemon::peer_by_id(const NodeId& id) {
    for (auto& p : peers_)
        if (p.node && *p.node == id) return &p;
    return nullptr;
}

void Daemon::note_peer(const std::string& id_hex, const std::string& addr) {
    if (id_hex.size() != 64 || addr.empty()) return;
    NodeId id = NodeId::from_hex(id_hex);
    if (id == key_.id()) return;
    for (auto& p : peers_) {
        if (p.addr == addr || (p.node && *p.node == id)) {
            p.node = id;
            p.addr = addr;
            p.last_ok_ms = now_ms();
            gossip_->add_peer(id);
            return;
        }
    }
    peers_.push_back(Peer{addr, id, now_ms(), 0});
    gossip_->add_peer(id);
}

void Daemon::enqueue_send(SendJob job) {
    {
        std::lock_guard lk(send_mu_);
        send_queue_.push_back(std::move(job));
    }
    send_cv_.notify_one();
}

void Daemon::sender_main() {
    while (true) {
        SendJob job;
        {
            std::unique_lock lk(send_mu_);
            send_cv_.wait(lk, [&] { return !send_queue_.empty() || !running_; });
            if (send_queue_.empty()) {
                if (!running_) return;
                continue;
            }
            job = std::move(send_queue_.front());
            send_queue_.pop_front();
        }

        httplib::Client cli = make_client(job.addr);
        httplib::Headers headers{{"X-Node-Id", key_.id().hex()}, {"X-Node-Addr", address()}};
        std::int64_t sent_at = now_ms();

        switch (job.kind) {
            case SendJob::Kind::dynt: {
                auto res = cli.Post("/gossip", headers, body_of(job.body),
                                    "application/octet-stream");
                if (res && res->status == 200 && res->body == "1" && job.payload) {
                    Bytes wire;
                    wire.push_back(static_cast<std::uint8_t>(WireKind::score));
                    Bytes enc = job.payload->canonical_encode();
                    wire.insert(wire.end(), enc.begin(), enc.end());
                    cli.Post("/gossip", headers, body_of(wire), "application/octet-stream");
                }
                if (res) touch_peer(job.addr, now_ms() - sent_at);
                break;
            }
            case SendJob::Kind::score:
            case SendJob::Kind::block:
            case SendJob::Kind::depart: {
                auto res = cli.Post("/gossip", headers, body_of(job.body),
                                    "application/octet-stream");
                if (res) touch_peer(job.addr, now_ms() - sent_at);
                break;
            }
            case SendJob::Kind::migrate: {
                auto res = cli.Post("/migrate", headers, body_of(job.body), "application/json");
                std::string app_id = job.app_id;
                Bytes blob = job.blob;
                if (res && res->status == 200) {
                    post([this, app_id] {
                        // Act only if the app is still sitting in the paused
                        // checkpoint state; it may have migrated back (or been
                        // re-placed here) while the transfer was in flight.
                        if (runtime_.has(app_id) && !runtime_.running(app_id)) {
                            runtime_.remove(app_id);
                            log("migrate_done", "app=" + app_id);
                        } else {
                            log("migrate_done", "app=" + app_id + " note=superseded");
                        }
                    });
                } else {
                    post([this, app_id, blob] {
                        if (runtime_.has(app_id) && !runtime_.running(app_id)) {
                            try {
                                runtime_.resume(app_id, blob);
                            } catch (const std::exception&) {
                            }
                            log("migrate_rollback", "app=" + app_id + " reason=transfer-failed");
                        }
                    });
                }
                break;
            }
            case SendJob::Kind::chain_pull: {
                // Doubles as the peer handshake: learn the peer's id, push
                // our own state, pull any chain suffix we are missing.
                auto rep = cli.Get("/node", headers);
                if (rep && rep->status == 200) {
                    try {
                        auto doc = nlohmann::json::parse(rep->body);
                        std::string id_hex = doc.at("node").get<std::string>();
                        std::string addr = job.addr;
                        post([this, id_hex, addr] { note_peer(id_hex, addr); });
                    } catch (const std::exception&) {
                    }
                    touch_peer(job.addr, now_ms() - sent_at);
                }
                if (job.payload)
                    cli.Put("/shared", headers, score_to_json(*job.payload), "application/json");
                auto res = cli.Get(("/chain?from=" + std::to_string(job.from_height)).c_str(),
                                   headers);
                if (res && res->status == 200 && !res->body.empty()) {
                    std::string body = res->body;
                    std::string addr = job.addr;
                    post([this, body, addr] {
                        std::span<const std::uint8_t> data(
                            reinterpret_cast<const std::uint8_t*>(body.data()), body.size());
                        std::size_t pos = 0;
                        while (pos + 8 <= data.size()) {
                            Decoder d(data.subspan(pos));
                            std::uint64_t len = d.get_u64();
                            if (len > d.remaining()) break;
                            try {
                                auto block = std::make_shared<const consensus::Block>(
                                    consensus::Block::decode(data.subspan(pos + 8, len)));
                                accept_block(block, addr);
                            } catch (const std::exception&) {
                                break;
                            }
                            pos += 8 + len;
                        }
                    });
                }
                break;
            }
        }
    }
}

void Daemon::touch_peer(const std::string& addr, std::int64_t rtt) {
    post([this, addr, rtt] {
        for (auto& p : peers_) {
            if (p.addr != addr) continue;
            p.last_ok_ms = now_ms();
            p.rtt_ewma_ms = p.rtt_ewma_ms == 0 ? rtt : (3 * p.rtt_ewma_ms + rtt) / 4;
        }
    });
}

// ---- HTTP surface ----------------------------------------------------------

std::string Daemon::node_representation() {
    nlohmann::json peers = nlohmann::json::array();
    for (const auto& p : peers_) {
        peers.push_back({{"addr", p.addr},
                         {"node", p.node ? nlohmann::json(p.node->hex()) : nlohmann::json()},
                         {"last_connection_ms", p.last_ok_ms},
                         {"avg_connection_ms", p.rtt_ewma_ms}});
    }
    nlohmann::json pool = nlohmann::json::array();
    for (const auto& [id, s] : gossip_->pool()) {
        pool.push_back({{"node", id.hex()},
                        {"collected_at_ms", s->collected_at()},
                        {"stale", s->stale()},
                        {"apps", s->apps().size()}});
    }
    nlohmann::json apps = nlohmann::json::array();
    for (const auto& a : runtime_.list_apps())
        apps.push_back({{"app_id", a.app_id}, {"cpu_ppm", a.cpu.ppm}});

    nlohmann::json doc{
        {"node", key_.id().hex()},
        {"score", gossip_->own_score() ? nlohmann::json::parse(score_to_json(*gossip_->own_score()))
                                       : nlohmann::json()},
        {"chain", {{"height", chain_.height()}, {"head", chain_.head_hash().hex()}}},
        {"peers", peers},
        {"pool", pool},
        {"apps", apps}};
    return doc.dump();
}

void Daemon::setup_routes() {
    auto& svr = http_->server;

    svr.Get("/node", [this](const httplib::Request&, httplib::Response& res) {
        try {
            res.set_content(call<std::string>([this] { return node_representation(); }),
                            "application/json");
        } catch (const std::exception&) {
            res.status = 503;
        }
    });

    svr.Put("/shared", [this](const httplib::Request& req, httplib::Response& res) {
        NodeScore score;
        try {
            score = score_from_json(req.body);
        } catch (const std::invalid_argument& e) {
            res.status = 400;
            res.set_content(std::string("{\"error\":\"validation\",\"detail\":\"") + e.what() +
                                "\"}",
                            "application/json");
            return;
        }
        if (!score.signature_valid()) {
            res.status = 401;
            res.set_content("{\"error\":\"authentication\"}", "application/json");
            return;
        }
        try {
            auto from_hex = req.get_header_value("X-Node-Id");
            auto from_addr = req.get_header_value("X-Node-Addr");
            bool ok = call<bool>([this, &score, from_hex, from_addr] {
                if (!from_hex.empty()) note_peer(from_hex, from_addr);
                Bytes wire;
                wire.push_back(static_cast<std::uint8_t>(WireKind::score));
                Bytes enc = score.canonical_encode();
                wire.insert(wire.end(), enc.begin(), enc.end());
                std::string unused;
                handle_wire(wire, from_hex, from_addr, unused);
                return true;
            });
            res.status = ok ? 200 : 503;
            res.set_content("{\"ok\":true}", "application/json");
        } catch (const std::exception&) {
            res.status = 503;
        }
    });

    svr.Post("/shared", [this](const httplib::Request& req, httplib::Response& res) {
        NodeScore score;
        std::string addr;
        try {
            score = score_from_json(req.body);
            auto doc = nlohmann::json::parse(req.body);
            if (doc.contains("addr")) addr = doc.at("addr").get<std::string>();
        } catch (const std::invalid_argument& e) {
            res.status = 400;
            res.set_content(std::string("{\"error\":\"validation\",\"detail\":\"") + e.what() +
                                "\"}",
                            "application/json");
            return;
        } catch (const nlohmann::json::exception&) {
            res.status = 400;
            res.set_content("{\"error\":\"validation\"}", "application/json");
            return;
        }
        if (!score.signature_valid()) {
            res.status = 401;
            res.set_content("{\"error\":\"authentication\"}", "application/json");
            return;
        }
        try {
            int status = call<int>([this, &score, addr] {
                if (gossip_->pool().contains(score.node())) return 409;
                if (!addr.empty()) note_peer(score.node().hex(), addr);
                departed_ms_.erase(score.node());
                Bytes wire;
                wire.push_back(static_cast<std::uint8_t>(WireKind::score));
                Bytes enc = score.canonical_encode();
                wire.insert(wire.end(), enc.begin(), enc.end());
                std::string unused;
                handle_wire(wire, "", addr, unused);
                return 200;
            });
            res.status = status;
            res.set_content(status == 200 ? "{\"ok\":true}"
                                          : "{\"error\":\"conflict\",\"hint\":\"use PUT\"}",
                            "application/json");
        } catch (const std::exception&) {
            res.status = 503;
        }
    });

    svr.Delete(R"(/node/([0-9a-fA-F]{64}))", [this](const httplib::Request& req,
                                                    httplib::Response& res) {
        DepartureNote note;
        try {
            note = DepartureNote::from_json(req.body);
        } catch (const std::invalid_argument&) {
            res.status = 400;
            res.set_content("{\"error\":\"validation\"}", "application/json");
            return;
        }
        NodeId target = NodeId::from_hex(req.matches[1].str());
        if (note.node != target) {
            res.status = 403;
            res.set_content("{\"error\":\"authorization\"}", "application/json");
            return;
        }
        if (!note.signature_valid()) {
            res.status = 403;
            res.set_content("{\"error\":\"authorization\"}", "application/json");
            return;
        }
        try {
            int status = call<int>([this, &note] {
                if (!gossip_->pool().contains(note.node)) return 404;
                gossip::SigKey sig{note.signature.bytes};
                seen_departures_.insert(sig);
                apply_departure(note);
                Bytes wire;
                wire.push_back(static_cast<std::uint8_t>(WireKind::depart));
                Bytes enc = note.canonical_encode();
                wire.insert(wire.end(), enc.begin(), enc.end());
                for (auto& p : peers_)
                    enqueue_send({SendJob::Kind::depart, p.addr, wire, nullptr, 0, {}, {}});
                return 200;
            });
            res.status = status;
            res.set_content(status == 200 ? "{\"ok\":true}" : "{\"error\":\"not-found\"}",
                            "application/json");
        } catch (const std::exception&) {
            res.status = 503;
        }
    });

    svr.Post("/gossip", [this](const httplib::Request& req, httplib::Response& res) {
        try {
            Bytes body(req.body.begin(), req.body.end());
            auto from_hex = req.get_header_value("X-Node-Id");
            auto from_addr = req.get_header_value("X-Node-Addr");
            std::string reply = call<std::string>([this, &body, from_hex, from_addr] {
                std::string r;
                handle_wire(body, from_hex, from_addr, r);
                return r;
            });
            res.set_content(reply, "application/octet-stream");
        } catch (const std::exception&) {
            res.status = 503;
        }
    });

    svr.Get("/chain", [this](const httplib::Request& req, httplib::Response& res) {
        std::uint64_t from = 0;
        if (req.has_param("from")) from = std::stoull(req.get_param_value("from"));
        try {
            std::string body = call<std::string>([this, from] {
                std::string out;
                for (const auto& b : chain_.blocks()) {
                    if (b->height < from) continue;
                    Bytes enc = b->canonical_encode();
                    Encoder len;
                    len.put_u64(enc.size());
                    out.append(reinterpret_cast<const char*>(len.bytes().data()), 8);
                    out.append(reinterpret_cast<const char*>(enc.data()), enc.size());
                }
                return out;
            });
            res.set_content(body, "application/octet-stream");
        } catch (const std::exception&) {
            res.status = 503;
        }
    });

    svr.Post("/migrate", [this](const httplib::Request& req, httplib::Response& res) {
        std::string app_id;
        Bytes blob;
        try {
            auto doc = nlohmann::json::parse(req.body);
            app_id = doc.at("app_id").get<std::string>();
            blob = base64_decode(doc.at("context").get<std::string>());
        } catch (const std::exception&) {
            res.status = 400;
            res.set_content("{\"error\":\"validation\"}", "application/json");
            return;
        }
        try {
            bool ok = call<bool>([this, app_id, blob] {
                try {
                    runtime_.resume(app_id, blob);
                    log("app_resumed", "app=" + app_id);
                    return true;
                } catch (const std::exception&) {
                    return false;
                }
            });
            res.status = ok ? 200 : 500;
            res.set_content(ok ? "{\"ok\":true}" : "{\"error\":\"resume-failed\"}",
                            "application/json");
        } catch (const std::exception&) {
            res.status = 503;
        }
    });
}

std::uint64_t Daemon::chain_height() {
    return call<std::uint64_t>([this] { return chain_.height(); });
}

Hash Daemon::chain_head() {
    return call<Hash>([this] { return chain_.head_hash(); });
}

std::vector<std::string> Daemon::running_app_ids() {
    return call<std::vector<std::string>>([this] {
        std::vector<std::string> out;
        for (const auto& a : runtime_.list_apps()) out.push_back(a.app_id);
        return out;
    });
}

}  // namespace edgebal::daemon
