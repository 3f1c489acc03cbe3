#include "edgebal/core/score.hpp"

#include <algorithm>

namespace edgebal {

void AppRecord::encode_into(Encoder& e) const {
    e.put_string(app_id);
    e.put_i64(cpu.ppm);
    e.put_i64(ram.ppm);
    e.put_i64(disk.ppm);
    e.put_i64(network.ppm);
    e.put_i64(timestamp_ms);
}

AppRecord AppRecord::decode_from(Decoder& d) {
    AppRecord r;
    r.app_id = d.get_string();
    if (r.app_id.empty()) d.fail("empty app id");
    r.cpu = ResourceFraction{d.get_i64()};
    r.ram = ResourceFraction{d.get_i64()};
    r.disk = ResourceFraction{d.get_i64()};
    r.network = ResourceFraction{d.get_i64()};
    r.timestamp_ms = d.get_i64();
    if (!r.cpu.valid() || !r.ram.valid() || !r.disk.valid() || !r.network.valid())
        d.fail("resource fraction out of range");
    if (r.timestamp_ms < 0) d.fail("negative timestamp");
    return r;
}

NodeScore::NodeScore(NodeId node, std::vector<AppRecord> apps, std::int64_t collected_at_ms,
                     bool stale)
    : node_(node), apps_(std::move(apps)), collected_at_(collected_at_ms), stale_(stale) {
    std::sort(apps_.begin(), apps_.end(),
              [](const AppRecord& a, const AppRecord& b) { return a.app_id < b.app_id; });
    for (std::size_t i = 1; i < apps_.size(); ++i)
        if (apps_[i - 1].app_id == apps_[i].app_id)
            throw std::invalid_argument("duplicate app id in score");
}

Bytes NodeScore::signing_bytes() const {
    Encoder e;
    e.put_u8(static_cast<std::uint8_t>(WireTag::score));
    e.put_array(node_.bytes);
    e.put_list_len(apps_.size());
    for (const auto& a : apps_) a.encode_into(e);
    e.put_i64(collected_at_);
    e.put_bool(stale_);
    return e.take();
}

void NodeScore::sign_with(const KeyPair& key) {
    if (key.id() != node_) throw std::invalid_argument("signing key does not match score node");
    signature_ = key.sign(signing_bytes());
    sig_ok_ = true;
}

bool NodeScore::signature_valid() const {
    if (!sig_ok_) sig_ok_ = verify(signature_, signing_bytes());
    return *sig_ok_;
}

Bytes NodeScore::canonical_encode() const {
    Encoder e;
    encode_into(e);
    return e.take();
}

void NodeScore::encode_into(Encoder& e) const {
    Bytes sb = signing_bytes();
    e.put_raw(sb.data(), sb.size());
    e.put_array(signature_.bytes);
}

NodeScore NodeScore::decode(std::span<const std::uint8_t> data) {
    Decoder d(data);
    NodeScore s = decode_from(d);
    d.expect_end();
    return s;
}

NodeScore NodeScore::decode_from(Decoder& d) {
    if (d.get_u8() != static_cast<std::uint8_t>(WireTag::score)) d.fail("bad score tag");
    NodeScore s;
    s.node_.bytes = d.get_array<32>();
    std::uint64_t n = d.get_list_len(1u << 20);
    s.apps_.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        AppRecord r = AppRecord::decode_from(d);
        if (!s.apps_.empty() && !(s.apps_.back().app_id < r.app_id))
            d.fail("app records not strictly sorted by app id");
        s.apps_.push_back(std::move(r));
    }
    s.collected_at_ = d.get_i64();
    if (s.collected_at_ < 0) d.fail("negative collection timestamp");
    s.stale_ = d.get_bool();
    s.signature_.bytes = d.get_array<64>();
    s.signature_.signer = s.node_;
    return s;
}

}  // namespace edgebal
