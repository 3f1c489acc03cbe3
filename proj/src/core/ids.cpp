#include "edgebal/core/ids.hpp"

#include <stdexcept>

namespace edgebal {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace

std::string to_hex(const std::uint8_t* data, std::size_t len) {
    std::string s;
    s.reserve(len * 2);
    for (std::size_t i = 0; i < len; ++i) {
        s.push_back(kHexDigits[data[i] >> 4]);
        s.push_back(kHexDigits[data[i] & 0x0f]);
    }
    return s;
}

bool from_hex(const std::string& h, std::uint8_t* out, std::size_t len) {
    if (h.size() != len * 2) return false;
    for (std::size_t i = 0; i < len; ++i) {
        int hi = hex_val(h[2 * i]);
        int lo = hex_val(h[2 * i + 1]);
        if (hi < 0 || lo < 0) return false;
        out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
    }
    return true;
}

std::string NodeId::hex() const { return to_hex(bytes.data(), bytes.size()); }

NodeId NodeId::from_hex(const std::string& h) {
    NodeId id;
    if (!edgebal::from_hex(h, id.bytes.data(), id.bytes.size()))
        throw std::invalid_argument("node id hex must be 64 hex digits");
    return id;
}

std::string Hash::hex() const { return to_hex(bytes.data(), bytes.size()); }

}  // namespace edgebal
