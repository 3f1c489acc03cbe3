#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <cstring>
#include <string>

namespace edgebal {

// 32-byte identifier derived from an Ed25519 public key. Identity equals
// key possession: the id *is* the verification key.
struct NodeId {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const NodeId&) const = default;
    [[nodiscard]] bool is_zero() const {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }
    [[nodiscard]] std::string hex() const;
    static NodeId from_hex(const std::string& h);
};

// 32-byte SHA-256 digest.
struct Hash {
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const Hash&) const = default;
    [[nodiscard]] bool is_zero() const {
        for (auto b : bytes)
            if (b != 0) return false;
        return true;
    }
    [[nodiscard]] std::string hex() const;
};

// Fixed-width detached signature plus the id of the signer.
struct Signature {
    std::array<std::uint8_t, 64> bytes{};
    NodeId signer;

    auto operator<=>(const Signature&) const = default;
};

std::string to_hex(const std::uint8_t* data, std::size_t len);
bool from_hex(const std::string& h, std::uint8_t* out, std::size_t len);

}  // namespace edgebal

template <>
struct std::hash<edgebal::NodeId> {
    std::size_t operator()(const edgebal::NodeId& id) const noexcept {
        std::uint64_t v;
        std::memcpy(&v, id.bytes.data(), sizeof(v));
        return static_cast<std::size_t>(v);
    }
};

template <>
struct std::hash<edgebal::Hash> {
    std::size_t operator()(const edgebal::Hash& h) const noexcept {
        std::uint64_t v;
        std::memcpy(&v, h.bytes.data(), sizeof(v));
        return static_cast<std::size_t>(v);
    }
};
