#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace edgebal {

using Bytes = std::vector<std::uint8_t>;

struct CodecError : std::runtime_error {
    std::size_t offset;
    CodecError(const std::string& what, std::size_t off)
        : std::runtime_error(what + " at offset " + std::to_string(off)), offset(off) {}
};

// Canonical byte encoding primitives. Fixed field order, integers as
// 8-byte big-endian, lists and strings length-prefixed, no floating
// point anywhere: the encoding of equal values is byte-equal and the
// encoding of distinct valid values differs.
class Encoder {
public:
    void put_u8(std::uint8_t v) { out_.push_back(v); }

    void put_u64(std::uint64_t v) {
        for (int shift = 56; shift >= 0; shift -= 8)
            out_.push_back(static_cast<std::uint8_t>(v >> shift));
    }

    void put_i64(std::int64_t v) { put_u64(static_cast<std::uint64_t>(v)); }

    void put_bool(bool v) { put_u8(v ? 1 : 0); }

    void put_raw(const std::uint8_t* data, std::size_t len) {
        out_.insert(out_.end(), data, data + len);
    }

    template <std::size_t N>
    void put_array(const std::array<std::uint8_t, N>& a) {
        put_raw(a.data(), N);
    }

    void put_string(const std::string& s) {
        put_u64(s.size());
        put_raw(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
    }

    void put_list_len(std::size_t n) { put_u64(n); }

    [[nodiscard]] const Bytes& bytes() const { return out_; }
    Bytes take() { return std::move(out_); }

private:
    Bytes out_;
};

class Decoder {
public:
    explicit Decoder(std::span<const std::uint8_t> data) : data_(data) {}

    std::uint8_t get_u8() {
        need(1);
        return data_[pos_++];
    }

    std::uint64_t get_u64() {
        need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_++];
        return v;
    }

    std::int64_t get_i64() { return static_cast<std::int64_t>(get_u64()); }

    bool get_bool() {
        std::uint8_t v = get_u8();
        if (v > 1) fail("boolean byte not 0 or 1");
        return v == 1;
    }

    template <std::size_t N>
    std::array<std::uint8_t, N> get_array() {
        need(N);
        std::array<std::uint8_t, N> a;
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(pos_), N, a.begin());
        pos_ += N;
        return a;
    }

    std::string get_string() {
        std::uint64_t n = get_u64();
        if (n > remaining()) fail("string length exceeds input");
        std::string s(reinterpret_cast<const char*>(data_.data() + pos_), n);
        pos_ += n;
        return s;
    }

    std::uint64_t get_list_len(std::uint64_t max_plausible) {
        std::uint64_t n = get_u64();
        if (n > max_plausible || n > remaining()) fail("list length implausible");
        return n;
    }

    [[nodiscard]] std::size_t remaining() const { return data_.size() - pos_; }
    [[nodiscard]] std::size_t offset() const { return pos_; }

    void expect_end() const {
        if (pos_ != data_.size()) fail("trailing bytes after value");
    }

    [[noreturn]] void fail(const std::string& what) const { throw CodecError(what, pos_); }

private:
    void need(std::size_t n) const {
        if (remaining() < n) fail("input truncated");
    }

    std::span<const std::uint8_t> data_;
    std::size_t pos_ = 0;
};

// Leading tag byte of each top-level canonical encoding; gives cross-type
// domain separation for hashing and signing.
enum class WireTag : std::uint8_t {
    score = 0x53,      // 'S'
    block = 0x42,      // 'B'
    plan = 0x50,       // 'P'
    departure = 0x44,  // 'D'
};

}  // namespace edgebal
