#pragma once

#include <string>

#include "edgebal/core/codec.hpp"
#include "edgebal/core/crypto.hpp"
#include "edgebal/core/score.hpp"

namespace edgebal::daemon {

std::string base64_encode(const std::uint8_t* data, std::size_t len);
inline std::string base64_encode(const Bytes& b) { return base64_encode(b.data(), b.size()); }
Bytes base64_decode(const std::string& s);  // throws std::invalid_argument

// JSON document forms of the API bodies. Signatures travel base64-encoded
// and are checked against the canonical re-encoding on the way in.
std::string score_to_json(const NodeScore& score);
NodeScore score_from_json(const std::string& body);  // throws std::invalid_argument

// Signed statement that a node leaves the network on purpose.
struct DepartureNote {
    NodeId node;
    std::int64_t timestamp_ms = 0;
    Signature signature;

    [[nodiscard]] Bytes signing_bytes() const;
    void sign_with(const KeyPair& key);
    [[nodiscard]] bool signature_valid() const;

    [[nodiscard]] Bytes canonical_encode() const;
    static DepartureNote decode(std::span<const std::uint8_t> data);

    [[nodiscard]] std::string to_json() const;
    static DepartureNote from_json(const std::string& body);
};

}  // namespace edgebal::daemon
