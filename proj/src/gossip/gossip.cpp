#include "edgebal/gossip/gossip.hpp"

#include <algorithm>

namespace edgebal::gossip {

GossipNode::GossipNode(const KeyPair& key, GossipConfig config)
    : self_(key.id()), key_(&key), config_(config) {}

void GossipNode::set_peers(std::vector<NodeId> peers) {
    peers_ = std::move(peers);
    std::sort(peers_.begin(), peers_.end());
    peers_.erase(std::unique(peers_.begin(), peers_.end()), peers_.end());
    std::erase(peers_, self_);
}

void GossipNode::add_peer(const NodeId& peer) {
    if (peer == self_) return;
    if (std::find(peers_.begin(), peers_.end(), peer) == peers_.end()) {
        peers_.push_back(peer);
        std::sort(peers_.begin(), peers_.end());
    }
}

void GossipNode::remove_peer(const NodeId& peer) { std::erase(peers_, peer); }

ScorePtr GossipNode::collect_local_state(daemon::RuntimeAdapter& runtime, std::int64_t now_ms) {
    std::shared_ptr<NodeScore> score;
    try {
        std::vector<AppRecord> apps = runtime.list_apps();
        for (auto& a : apps) a.timestamp_ms = now_ms;
        score = std::make_shared<NodeScore>(self_, std::move(apps), now_ms, false);
    } catch (const std::exception&) {
        // Re-stamp the previous report, flagged stale, rather than going
        // silent: a missing score reads as a dead node to the planner.
        std::vector<AppRecord> apps = own_score_ ? own_score_->apps() : std::vector<AppRecord>{};
        score = std::make_shared<NodeScore>(self_, std::move(apps), now_ms, true);
    }
    score->sign_with(*key_);
    own_score_ = score;
    pool_update(own_score_);

    SigKey sig = SigKey::of(*own_score_);
    remember_seen(sig);  // locally originated
    remember_offer(sig, own_score_);
    return own_score_;
}

std::vector<NodeId> GossipNode::on_timer(std::int64_t now_ms) {
    if (!own_score_) return {};
    if (last_broadcast_ >= 0 && now_ms - last_broadcast_ < config_.delta_st_ms) return {};
    last_broadcast_ = now_ms;  // resets even for an isolated node
    return peers_;
}

bool GossipNode::handle_dynt(const SigKey& sig, const NodeId& /*from*/, std::int64_t now_ms) {
    if (seen_.contains(sig)) return false;
    auto it = pending_.find(sig);
    if (it != pending_.end() && it->second > now_ms) return false;
    pending_[sig] = now_ms + config_.pending_timeout_ms();
    return true;
}

std::optional<ScorePtr> GossipNode::handle_dynt_reply(const SigKey& sig, const NodeId& /*from*/,
                                                      bool wanted) {
    if (!wanted) return std::nullopt;
    return payload_for(sig);
}

std::vector<NodeId> GossipNode::handle_score(const ScorePtr& score, const NodeId& origin_peer,
                                             std::int64_t now_ms) {
    if (!score || !score->signature_valid()) {
        ++counters_.tampered_dropped;
        return {};
    }
    SigKey sig = SigKey::of(*score);
    pending_.erase(sig);
    if (seen_.contains(sig)) {
        ++counters_.duplicates_dropped;
        return {};
    }
    remember_seen(sig);
    remember_offer(sig, score);
    pool_update(score);
    ++counters_.scores_accepted;
    (void)now_ms;

    std::vector<NodeId> forward;
    forward.reserve(peers_.size());
    for (const auto& p : peers_)
        if (p != origin_peer) forward.push_back(p);
    return forward;
}

void GossipNode::ingest_score(const ScorePtr& score) {
    if (!score || !score->signature_valid()) {
        ++counters_.tampered_dropped;
        return;
    }
    pool_update(score);
    ++counters_.scores_accepted;
}

std::optional<ScorePtr> GossipNode::payload_for(const SigKey& sig) const {
    auto it = offers_.find(sig);
    if (it == offers_.end()) return std::nullopt;
    return it->second;
}

consensus::ScorePoolView GossipNode::pool_view() const {
    consensus::ScorePoolView view;
    view.scores.reserve(pool_.size());
    for (const auto& [id, s] : pool_) view.scores.push_back(*s);
    std::sort(view.scores.begin(), view.scores.end(),
              [](const NodeScore& a, const NodeScore& b) { return a.node() < b.node(); });
    return view;
}

std::vector<NodeId> GossipNode::fresh_ids(std::int64_t now_ms, std::int64_t freshness_ms) const {
    std::vector<NodeId> out;
    for (const auto& [id, s] : pool_)
        if (now_ms - s->collected_at() < freshness_ms) out.push_back(id);
    std::sort(out.begin(), out.end());
    return out;
}

void GossipNode::remove_from_pool(const NodeId& node) { pool_.erase(node); }

void GossipNode::remember_seen(const SigKey& sig) {
    if (seen_.insert(sig).second) {
        seen_fifo_.push_back(sig);
        while (seen_fifo_.size() > config_.seen_cache_capacity) {
            seen_.erase(seen_fifo_.front());
            seen_fifo_.pop_front();
        }
    }
}

void GossipNode::remember_offer(const SigKey& sig, const ScorePtr& score) {
    if (offers_.emplace(sig, score).second) {
        offer_fifo_.push_back(sig);
        // Offers only matter while DYNTs are in flight; cap well below the
        // seen cache.
        while (offer_fifo_.size() > 4096) {
            offers_.erase(offer_fifo_.front());
            offer_fifo_.pop_front();
        }
    }
}

void GossipNode::pool_update(const ScorePtr& score) {
    auto it = pool_.find(score->node());
    if (it == pool_.end()) {
        pool_.emplace(score->node(), score);
        return;
    }
    const NodeScore& held = *it->second;
    bool fresher = score->collected_at() > held.collected_at() ||
                   (score->collected_at() == held.collected_at() &&
                    score->signature().bytes < held.signature().bytes);
    if (fresher) it->second = score;
}

}  // namespace edgebal::gossip
