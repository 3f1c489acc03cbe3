#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "edgebal/core/codec.hpp"
#include "edgebal/core/crypto.hpp"
#include "edgebal/core/ids.hpp"
#include "edgebal/core/resource.hpp"

namespace edgebal {

// One row of a node's state matrix: an application and its measured
// resource consumption, timestamped in milliseconds since the epoch.
struct AppRecord {
    std::string app_id;
    ResourceFraction cpu;
    ResourceFraction ram;
    ResourceFraction disk;
    ResourceFraction network;
    std::int64_t timestamp_ms = 0;

    auto operator<=>(const AppRecord&) const = default;

    void encode_into(Encoder& e) const;
    static AppRecord decode_from(Decoder& d);
};

// A node's signed self-report: its running apps (sorted by app_id),
// the collection timestamp and a staleness flag set when the report
// re-stamps a previous collection because local introspection failed.
// The signature covers the canonical encoding of everything above it.
class NodeScore {
public:
    NodeScore() = default;
    NodeScore(NodeId node, std::vector<AppRecord> apps, std::int64_t collected_at_ms,
              bool stale = false);

    [[nodiscard]] const NodeId& node() const { return node_; }
    [[nodiscard]] const std::vector<AppRecord>& apps() const { return apps_; }
    [[nodiscard]] std::int64_t collected_at() const { return collected_at_; }
    [[nodiscard]] bool stale() const { return stale_; }
    [[nodiscard]] const Signature& signature() const { return signature_; }

    // Bytes the signature is computed over.
    [[nodiscard]] Bytes signing_bytes() const;

    // Signs in place; the key's id must equal node(). Marks the score
    // locally trusted (its own freshly made signature needs no re-check).
    void sign_with(const KeyPair& key);

    // Signature validity, memoized per object. Wire-decoded scores pay a
    // real verification on first query; locally signed ones are trusted.
    [[nodiscard]] bool signature_valid() const;

    // Full canonical encoding (signing bytes + signature bytes).
    [[nodiscard]] Bytes canonical_encode() const;
    void encode_into(Encoder& e) const;

    static NodeScore decode(std::span<const std::uint8_t> data);
    static NodeScore decode_from(Decoder& d);

    bool operator==(const NodeScore& o) const {
        return node_ == o.node_ && apps_ == o.apps_ && collected_at_ == o.collected_at_ &&
               stale_ == o.stale_ && signature_ == o.signature_;
    }

private:
    NodeId node_;
    std::vector<AppRecord> apps_;  // sorted by app_id, ids unique
    std::int64_t collected_at_ = 0;
    bool stale_ = false;
    Signature signature_;
    mutable std::optional<bool> sig_ok_;
};

}  // namespace edgebal
