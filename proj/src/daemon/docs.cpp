#include "edgebal/daemon/docs.hpp"

#include <json.hpp>

#include <stdexcept>

namespace edgebal::daemon {

namespace {
constexpr char kB64[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

int b64_val(char c) {
    if (c >= 'A' && c <= 'Z') return c - 'A';
    if (c >= 'a' && c <= 'z') return c - 'a' + 26;
    if (c >= '0' && c <= '9') return c - '0' + 52;
    if (c == '+') return 62;
    if (c == '/') return 63;
    return -1;
}
}  // namespace

std::string base64_encode(const std::uint8_t* data, std::size_t len) {
    std::string out;
    out.reserve((len + 2) / 3 * 4);
    for (std::size_t i = 0; i < len; i += 3) {
        std::uint32_t v = static_cast<std::uint32_t>(data[i]) << 16;
        if (i + 1 < len) v |= static_cast<std::uint32_t>(data[i + 1]) << 8;
        if (i + 2 < len) v |= data[i + 2];
        out.push_back(kB64[(v >> 18) & 0x3f]);
        out.push_back(kB64[(v >> 12) & 0x3f]);
        out.push_back(i + 1 < len ? kB64[(v >> 6) & 0x3f] : '=');
        out.push_back(i + 2 < len ? kB64[v & 0x3f] : '=');
    }
    return out;
}

Bytes base64_decode(const std::string& s) {
    if (s.size() % 4 != 0) throw std::invalid_argument("base64 length not a multiple of 4");
    Bytes out;
    out.reserve(s.size() / 4 * 3);
    for (std::size_t i = 0; i < s.size(); i += 4) {
        int vals[4];
        int pad = 0;
        for (int k = 0; k < 4; ++k) {
            char c = s[i + k];
            if (c == '=' && i + 4 == s.size() && k >= 2) {
                vals[k] = 0;
                ++pad;
            } else {
                vals[k] = b64_val(c);
                if (vals[k] < 0 || pad > 0) throw std::invalid_argument("bad base64 character");
            }
        }
        std::uint32_t v = (static_cast<std::uint32_t>(vals[0]) << 18) |
                          (static_cast<std::uint32_t>(vals[1]) << 12) |
                          (static_cast<std::uint32_t>(vals[2]) << 6) |
                          static_cast<std::uint32_t>(vals[3]);
        out.push_back(static_cast<std::uint8_t>(v >> 16));
        if (pad < 2) out.push_back(static_cast<std::uint8_t>(v >> 8));
        if (pad < 1) out.push_back(static_cast<std::uint8_t>(v));
    }
    return out;
}

std::string score_to_json(const NodeScore& score) {
    nlohmann::json apps = nlohmann::json::array();
    for (const auto& a : score.apps()) {
        apps.push_back({{"app_id", a.app_id},
                        {"cpu_ppm", a.cpu.ppm},
                        {"ram_ppm", a.ram.ppm},
                        {"disk_ppm", a.disk.ppm},
                        {"network_ppm", a.network.ppm},
                        {"timestamp_ms", a.timestamp_ms}});
    }
    nlohmann::json doc{{"node", score.node().hex()},
                       {"collected_at_ms", score.collected_at()},
                       {"stale", score.stale()},
                       {"apps", apps},
                       {"signature", base64_encode(score.signature().bytes.data(), 64)}};
    return doc.dump();
}

NodeScore score_from_json(const std::string& body) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(body);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("invalid json: ") + e.what());
    }
    try {
        std::vector<AppRecord> apps;
        for (const auto& a : doc.at("apps")) {
            apps.push_back({a.at("app_id").get<std::string>(),
                            ResourceFraction::checked(a.at("cpu_ppm").get<std::int64_t>()),
                            ResourceFraction::checked(a.at("ram_ppm").get<std::int64_t>()),
                            ResourceFraction::checked(a.at("disk_ppm").get<std::int64_t>()),
                            ResourceFraction::checked(a.at("network_ppm").get<std::int64_t>()),
                            a.at("timestamp_ms").get<std::int64_t>()});
        }
        NodeScore score(NodeId::from_hex(doc.at("node").get<std::string>()), std::move(apps),
                        doc.at("collected_at_ms").get<std::int64_t>(),
                        doc.at("stale").get<bool>());
        Bytes sig = base64_decode(doc.at("signature").get<std::string>());
        if (sig.size() != 64) throw std::invalid_argument("signature must be 64 bytes");
        // Round-trip through the canonical encoding so every structural
        // rule (sorting, ranges) is enforced exactly once, in the codec.
        Encoder e;
        Bytes signing = score.signing_bytes();
        e.put_raw(signing.data(), signing.size());
        for (std::size_t i = 0; i < 64; ++i) e.put_u8(sig[i]);
        return NodeScore::decode(e.bytes());
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("score document malformed: ") + e.what());
    } catch (const CodecError& e) {
        throw std::invalid_argument(std::string("score document malformed: ") + e.what());
    } catch (const std::out_of_range& e) {
        throw std::invalid_argument(std::string("score document malformed: ") + e.what());
    }
}

Bytes DepartureNote::signing_bytes() const {
    Encoder e;
    e.put_u8(static_cast<std::uint8_t>(WireTag::departure));
    e.put_array(node.bytes);
    e.put_i64(timestamp_ms);
    return e.take();
}

void DepartureNote::sign_with(const KeyPair& key) {
    if (key.id() != node) throw std::invalid_argument("departure must be self-signed");
    signature = key.sign(signing_bytes());
}

bool DepartureNote::signature_valid() const {
    Signature s = signature;
    s.signer = node;
    return verify(s, signing_bytes());
}

Bytes DepartureNote::canonical_encode() const {
    Bytes b = signing_bytes();
    b.insert(b.end(), signature.bytes.begin(), signature.bytes.end());
    return b;
}

DepartureNote DepartureNote::decode(std::span<const std::uint8_t> data) {
    Decoder d(data);
    if (d.get_u8() != static_cast<std::uint8_t>(WireTag::departure)) d.fail("bad departure tag");
    DepartureNote n;
    n.node.bytes = d.get_array<32>();
    n.timestamp_ms = d.get_i64();
    n.signature.bytes = d.get_array<64>();
    n.signature.signer = n.node;
    d.expect_end();
    return n;
}

std::string DepartureNote::to_json() const {
    nlohmann::json doc{{"node", node.hex()},
                       {"timestamp_ms", timestamp_ms},
                       {"signature", base64_encode(signature.bytes.data(), 64)}};
    return doc.dump();
}

DepartureNote DepartureNote::from_json(const std::string& body) {
    try {
        nlohmann::json doc = nlohmann::json::parse(body);
        DepartureNote n;
        n.node = NodeId::from_hex(doc.at("node").get<std::string>());
        n.timestamp_ms = doc.at("timestamp_ms").get<std::int64_t>();
        Bytes sig = base64_decode(doc.at("signature").get<std::string>());
        if (sig.size() != 64) throw std::invalid_argument("signature must be 64 bytes");
        std::copy(sig.begin(), sig.end(), n.signature.bytes.begin());
        n.signature.signer = n.node;
        return n;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("departure document malformed: ") + e.what());
    }
}

}  // namespace edgebal::daemon
