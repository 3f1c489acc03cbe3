#include "edgebal/core/crypto.hpp"

#include <sodium.h>

#include <cstring>
#include <mutex>
#include <stdexcept>

namespace edgebal {

namespace {
void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("libsodium initialization failed");
    });
}
}  // namespace

Hash sha256(std::span<const std::uint8_t> data) {
    ensure_sodium();
    Hash h;
    crypto_hash_sha256(h.bytes.data(), data.data(), data.size());
    return h;
}

KeyPair KeyPair::from_seed(const std::array<std::uint8_t, 32>& seed) {
    ensure_sodium();
    KeyPair kp;
    if (crypto_sign_seed_keypair(kp.id_.bytes.data(), kp.secret_.data(), seed.data()) != 0)
        throw std::runtime_error("key generation failed");
    return kp;
}

KeyPair KeyPair::from_seed64(std::uint64_t seed) {
    std::array<std::uint8_t, 32> s{};
    for (int i = 0; i < 8; ++i) s[i] = static_cast<std::uint8_t>(seed >> (8 * i));
    // Stretch the 8-byte seed over the full width so nearby values do not
    // share seed bytes.
    Hash h = sha256(std::span<const std::uint8_t>(s.data(), 8));
    return from_seed(h.bytes);
}

Signature KeyPair::sign(std::span<const std::uint8_t> msg) const {
    ensure_sodium();
    Signature sig;
    sig.signer = id_;
    crypto_sign_detached(sig.bytes.data(), nullptr, msg.data(), msg.size(), secret_.data());
    return sig;
}

bool verify(const Signature& sig, std::span<const std::uint8_t> msg) {
    ensure_sodium();
    return crypto_sign_verify_detached(sig.bytes.data(), msg.data(), msg.size(),
                                       sig.signer.bytes.data()) == 0;
}

}  // namespace edgebal
