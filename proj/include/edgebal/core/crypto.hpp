#pragma once

#include <span>

#include "edgebal/core/codec.hpp"
#include "edgebal/core/ids.hpp"

namespace edgebal {

// SHA-256 of an arbitrary byte string.
Hash sha256(std::span<const std::uint8_t> data);

inline Hash sha256(const Bytes& b) { return sha256(std::span<const std::uint8_t>(b)); }

// Ed25519 key pair. The public key doubles as the NodeId.
class KeyPair {
public:
    // Deterministic key from a 32-byte seed.
    static KeyPair from_seed(const std::array<std::uint8_t, 32>& seed);
    // Convenience: seed derived from a 64-bit value (tests, simulations).
    static KeyPair from_seed64(std::uint64_t seed);

    [[nodiscard]] const NodeId& id() const { return id_; }
    [[nodiscard]] Signature sign(std::span<const std::uint8_t> msg) const;
    [[nodiscard]] Signature sign(const Bytes& msg) const {
        return sign(std::span<const std::uint8_t>(msg));
    }

private:
    KeyPair() = default;
    NodeId id_;
    std::array<std::uint8_t, 64> secret_{};
};

// True iff `sig` is a valid signature by `sig.signer` over `msg`.
// Malformed input yields false, never an abort.
bool verify(const Signature& sig, std::span<const std::uint8_t> msg);

inline bool verify(const Signature& sig, const Bytes& msg) {
    return verify(sig, std::span<const std::uint8_t>(msg));
}

}  // namespace edgebal
