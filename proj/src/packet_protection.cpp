#include "qcl/packet_protection.hpp"

#include <cstring>

#include "qcl/errors.hpp"

namespace qcl::packet {

namespace {

constexpr uint8_t kLongHeaderBit = 0x80;
constexpr uint8_t kFixedBit = 0x40;
constexpr size_t kSampleSkip = 4;  // the sample assumes a 4-byte pn field

bool is_long_header(uint8_t first) { return (first & kLongHeaderBit) != 0; }

uint8_t flag_mask_bits(uint8_t first) {
    // Long headers mask the reserved and pn-length bits (4); short headers
    // additionally mask the key-phase bit (5).
    return is_long_header(first) ? 0x0f : 0x1f;
}

void check_pn_len(size_t pn_len) {
    if (pn_len < 1 || pn_len > 4) {
        throw MalformedHeader("pn_len must be 1 to 4, got " + std::to_string(pn_len));
    }
}

uint64_t decode_varint(ByteSpan data, size_t& off) {
    if (off >= data.size()) {
        throw MalformedHeader("truncated varint");
    }
    size_t len = size_t{1} << (data[off] >> 6);
    if (off + len > data.size()) {
        throw MalformedHeader("truncated varint");
    }
    uint64_t value = data[off] & 0x3f;
    for (size_t i = 1; i < len; ++i) {
        value = (value << 8) | data[off + i];
    }
    off += len;
    return value;
}

void append_varint(Bytes& out, uint64_t value) {
    if (value < (uint64_t{1} << 6)) {
        out.push_back(static_cast<uint8_t>(value));
    } else if (value < (uint64_t{1} << 14)) {
        out.push_back(static_cast<uint8_t>(0x40 | (value >> 8)));
        out.push_back(static_cast<uint8_t>(value));
    } else if (value < (uint64_t{1} << 30)) {
        for (int shift = 24; shift >= 0; shift -= 8) {
            out.push_back(static_cast<uint8_t>(value >> shift));
        }
        out[out.size() - 4] |= 0x80;
    } else {
        throw MalformedHeader("varint value too large for a packet header");
    }
}

struct ParsedHeader {
    size_t pn_offset;
};

// Walks a long header up to the pn field. The length field must account for
// the rest of the datagram exactly: coalesced packets are out of scope.
ParsedHeader parse_long_header(ByteSpan wire) {
    size_t off = 1;
    if (wire.size() < off + 4) {
        throw MalformedHeader("long header truncated before version");
    }
    off += 4;
    uint8_t type = (wire[0] >> 4) & 0x03;
    if (type == 0x03) {
        throw MalformedHeader("retry packets carry no protected payload");
    }
    for (int cid = 0; cid < 2; ++cid) {
        if (off + 1 > wire.size()) {
            throw MalformedHeader("long header truncated before connection id");
        }
        size_t cid_len = wire[off++];
        if (cid_len > keys::kMaxConnectionIdLen) {
            throw MalformedHeader("connection id longer than 20 bytes");
        }
        if (off + cid_len > wire.size()) {
            throw MalformedHeader("long header truncated inside connection id");
        }
        off += cid_len;
    }
    if (type == 0x00) {  // Initial carries a token
        uint64_t token_len = decode_varint(wire, off);
        if (off + token_len > wire.size()) {
            throw MalformedHeader("long header truncated inside token");
        }
        off += token_len;
    }
    uint64_t length = decode_varint(wire, off);
    if (off + length != wire.size()) {
        throw MalformedHeader("length field does not cover the rest of the datagram");
    }
    return {off};
}

}  // namespace

std::array<uint8_t, crypto::kIvLen> compute_nonce(const std::array<uint8_t, crypto::kIvLen>& iv,
                                                  uint64_t pn) {
    std::array<uint8_t, crypto::kIvLen> nonce = iv;
    for (size_t i = 0; i < 8; ++i) {
        nonce[crypto::kIvLen - 1 - i] ^= static_cast<uint8_t>(pn >> (8 * i));
    }
    return nonce;
}

void encode_pn(uint64_t pn, size_t pn_len, uint8_t* out) {
    for (size_t i = 0; i < pn_len; ++i) {
        out[pn_len - 1 - i] = static_cast<uint8_t>(pn >> (8 * i));
    }
}

Bytes encode_pn(uint64_t pn, size_t pn_len) {
    check_pn_len(pn_len);
    Bytes out(pn_len);
    encode_pn(pn, pn_len, out.data());
    return out;
}

uint64_t pn_decode(uint64_t truncated, size_t pn_len, int64_t largest_acked) {
    check_pn_len(pn_len);
    int64_t expected = largest_acked + 1;
    int64_t win = int64_t{1} << (pn_len * 8);
    int64_t hwin = win / 2;
    int64_t mask = win - 1;
    int64_t candidate = (expected & ~mask) | static_cast<int64_t>(truncated);
    if (candidate <= expected - hwin && candidate < (int64_t{1} << 62) - win) {
        candidate += win;
    } else if (candidate > expected + hwin && candidate >= win) {
        candidate -= win;
    }
    return static_cast<uint64_t>(candidate);
}

Bytes make_short_header(ByteSpan dcid, size_t pn_len, bool key_phase, bool spin) {
    check_pn_len(pn_len);
    if (dcid.size() > keys::kMaxConnectionIdLen) {
        throw InvalidConnectionIdLength("connection id longer than 20 bytes");
    }
    Bytes header;
    header.reserve(1 + dcid.size());
    uint8_t first = kFixedBit | static_cast<uint8_t>(pn_len - 1);
    if (spin) first |= 0x20;
    if (key_phase) first |= 0x04;
    header.push_back(first);
    header.insert(header.end(), dcid.begin(), dcid.end());
    return header;
}

Bytes make_initial_header(ByteSpan dcid, ByteSpan scid, ByteSpan token, size_t pn_len,
                          size_t payload_len) {
    check_pn_len(pn_len);
    if (dcid.size() > keys::kMaxConnectionIdLen || scid.size() > keys::kMaxConnectionIdLen) {
        throw InvalidConnectionIdLength("connection id longer than 20 bytes");
    }
    Bytes header;
    header.push_back(kLongHeaderBit | kFixedBit | static_cast<uint8_t>(pn_len - 1));
    header.insert(header.end(), {0x00, 0x00, 0x00, 0x01});  // QUIC v1
    header.push_back(static_cast<uint8_t>(dcid.size()));
    header.insert(header.end(), dcid.begin(), dcid.end());
    header.push_back(static_cast<uint8_t>(scid.size()));
    header.insert(header.end(), scid.begin(), scid.end());
    append_varint(header, token.size());
    header.insert(header.end(), token.begin(), token.end());
    uint64_t length = pn_len + payload_len + crypto::kTagLen;
    // The length field is always encoded on two bytes, the common on-wire
    // shape for handshake-sized packets.
    if (length >= (uint64_t{1} << 14)) {
        throw MalformedHeader("packet too large for a two-byte length field");
    }
    header.push_back(static_cast<uint8_t>(0x40 | (length >> 8)));
    header.push_back(static_cast<uint8_t>(length));
    return header;
}

ProtectionContext::ProtectionContext(crypto::SuiteId suite, crypto::HpAlgId hp_alg,
                                     keys::PacketKeys keys)
    : suite_(suite),
      hp_alg_(hp_alg),
      keys_(std::move(keys)),
      aead_(suite, keys_.key) {
    if (hp_alg_ != crypto::HpAlgId::OFF) {
        masker_.emplace(hp_alg_, keys_.hp);
    }
}

size_t ProtectionContext::wire_size(size_t header_len, size_t pn_len, size_t payload_len) const {
    return header_len + pn_len + payload_len + crypto::kTagLen;
}

size_t ProtectionContext::protect_into(std::span<uint8_t> out, ByteSpan header, uint64_t pn,
                                       size_t pn_len, ByteSpan payload) {
    size_t total = wire_size(header.size(), pn_len, payload.size());
    if (out.size() < total) {
        throw TooShort("wire output buffer too small");
    }
    std::memcpy(out.data(), header.data(), header.size());
    size_t pn_offset = header.size();
    encode_pn(pn, pn_len, out.data() + pn_offset);
    ByteSpan aad(out.data(), pn_offset + pn_len);
    auto nonce = compute_nonce(keys_.iv, pn);
    aead_.seal_into(out.subspan(pn_offset + pn_len), nonce, aad, payload);
    return total;
}

void ProtectionContext::apply_hp(std::span<uint8_t> wire, size_t pn_offset) {
    if (!masker_) {
        return;
    }
    if (wire.size() < pn_offset + kSampleSkip + crypto::kSampleLen) {
        throw PayloadTooShortForSample("packet too short to sample at pn offset + 4");
    }
    size_t pn_len = (wire[0] & 0x03) + 1;
    crypto::Mask mask =
        masker_->mask(ByteSpan(wire.data() + pn_offset + kSampleSkip, crypto::kSampleLen)
                          .first<crypto::kSampleLen>());
    wire[0] ^= mask[0] & flag_mask_bits(wire[0]);
    for (size_t i = 0; i < pn_len; ++i) {
        wire[pn_offset + i] ^= mask[1 + i];
    }
}

size_t ProtectionContext::remove_hp(std::span<uint8_t> wire, size_t pn_offset) {
    if (!masker_) {
        return (wire[0] & 0x03) + 1;
    }
    if (wire.size() < pn_offset + kSampleSkip + crypto::kSampleLen) {
        throw PayloadTooShortForSample("packet too short to sample at pn offset + 4");
    }
    crypto::Mask mask =
        masker_->mask(ByteSpan(wire.data() + pn_offset + kSampleSkip, crypto::kSampleLen)
                          .first<crypto::kSampleLen>());
    wire[0] ^= mask[0] & flag_mask_bits(wire[0]);
    size_t pn_len = (wire[0] & 0x03) + 1;
    for (size_t i = 0; i < pn_len; ++i) {
        wire[pn_offset + i] ^= mask[1 + i];
    }
    return pn_len;
}

size_t ProtectionContext::open_payload_into(std::span<uint8_t> out, ByteSpan wire,
                                            size_t pn_offset, size_t pn_len, uint64_t pn) {
    ByteSpan aad = wire.first(pn_offset + pn_len);
    ByteSpan sealed = wire.subspan(pn_offset + pn_len);
    auto nonce = compute_nonce(keys_.iv, pn);
    return aead_.open_into(out, nonce, aad, sealed);
}

WirePacket ProtectionContext::seal(const PlainPacket& pkt) {
    check_pn_len(pkt.pn_len);
    if (pkt.pn > kMaxPacketNumber) {
        throw MalformedHeader("packet number exceeds 2^62 - 1");
    }
    if (pkt.header.empty()) {
        throw MalformedHeader("empty packet header");
    }
    if (((pkt.header[0] & 0x03) + 1u) != pkt.pn_len) {
        throw MalformedHeader("header pn-length bits disagree with pn_len");
    }
    if (hp_alg_ != crypto::HpAlgId::OFF &&
        pkt.pn_len + pkt.payload.size() + crypto::kTagLen < kSampleSkip + crypto::kSampleLen) {
        throw PayloadTooShortForSample("payload too short for the header-protection sample");
    }
    WirePacket wire;
    wire.bytes.resize(wire_size(pkt.header.size(), pkt.pn_len, pkt.payload.size()));
    protect_into(wire.bytes, pkt.header, pkt.pn, pkt.pn_len, pkt.payload);
    apply_hp(wire.bytes, pkt.header.size());
    return wire;
}

PlainPacket ProtectionContext::open(const WirePacket& wire, int64_t largest_acked,
                                    size_t dcid_len) {
    ByteSpan bytes = wire.bytes;
    if (bytes.empty()) {
        throw TooShort("empty packet");
    }
    size_t pn_offset;
    if (is_long_header(bytes[0])) {
        pn_offset = parse_long_header(bytes).pn_offset;
    } else {
        if (dcid_len > keys::kMaxConnectionIdLen) {
            throw InvalidConnectionIdLength("connection id longer than 20 bytes");
        }
        pn_offset = 1 + dcid_len;
        if (pn_offset >= bytes.size()) {
            throw MalformedHeader("short header truncated before pn");
        }
    }
    if (masker_ && bytes.size() < pn_offset + kSampleSkip + crypto::kSampleLen) {
        throw PayloadTooShortForSample("packet too short to sample at pn offset + 4");
    }

    Bytes buf(bytes.begin(), bytes.end());
    size_t pn_len = remove_hp(buf, pn_offset);
    if (pn_offset + pn_len + crypto::kTagLen > buf.size()) {
        throw TooShort("packet too short for pn and tag");
    }
    uint64_t truncated = 0;
    for (size_t i = 0; i < pn_len; ++i) {
        truncated = (truncated << 8) | buf[pn_offset + i];
    }
    uint64_t pn = pn_decode(truncated, pn_len, largest_acked);

    PlainPacket out;
    out.pn = pn;
    out.pn_len = pn_len;
    out.payload.resize(buf.size() - pn_offset - pn_len - crypto::kTagLen);
    open_payload_into(out.payload, buf, pn_offset, pn_len, pn);
    out.header.assign(buf.begin(), buf.begin() + pn_offset);
    return out;
}

WirePacket seal_packet(const keys::PacketKeys& keys, crypto::SuiteId suite, crypto::HpAlgId hp_alg,
                       const PlainPacket& pkt) {
    ProtectionContext ctx(suite, hp_alg, keys);
    return ctx.seal(pkt);
}

PlainPacket open_packet(const keys::PacketKeys& keys, crypto::SuiteId suite, crypto::HpAlgId hp_alg,
                        const WirePacket& wire, int64_t largest_acked, size_t dcid_len) {
    ProtectionContext ctx(suite, hp_alg, keys);
    return ctx.open(wire, largest_acked, dcid_len);
}

size_t packet_capacity(size_t mtu, size_t header_len, size_t pn_len) {
    size_t overhead = kIpUdpOverhead + header_len + pn_len + crypto::kTagLen;
    if (mtu <= overhead) {
        throw MtuTooSmall("mtu " + std::to_string(mtu) + " leaves no payload room after " +
                          std::to_string(overhead) + " bytes of overhead");
    }
    return mtu - overhead;
}

std::vector<size_t> packetize(uint64_t total_len, size_t mtu, size_t header_len, size_t pn_len) {
    size_t capacity = packet_capacity(mtu, header_len, pn_len);
    std::vector<size_t> sizes;
    if (total_len == 0) {
        return sizes;
    }
    sizes.reserve(static_cast<size_t>((total_len + capacity - 1) / capacity));
    while (total_len >= capacity) {
        sizes.push_back(capacity);
        total_len -= capacity;
    }
    if (total_len > 0) {
        sizes.push_back(static_cast<size_t>(total_len));
    }
    return sizes;
}

}  // namespace qcl::packet
