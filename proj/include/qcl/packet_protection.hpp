#pragma once

// QUIC v1 symmetric packet protection: AEAD sealing with the pn-XOR nonce,
// header-protection masking driven by a ciphertext sample, packet-number
// encode/decode, and the MTU payload packetizer.

#include <cstdint>
#include <optional>

#include "qcl/bytes.hpp"
#include "qcl/crypto_suites.hpp"
#include "qcl/key_schedule.hpp"

namespace qcl::packet {

// Fixed per-packet wire overhead below UDP: IPv4 (20) + UDP (8).
inline constexpr size_t kIpUdpOverhead = 28;
inline constexpr uint64_t kMaxPacketNumber = (uint64_t{1} << 62) - 1;
inline constexpr int64_t kNoLargestAcked = -1;

struct PlainPacket {
    Bytes header;    // all header bytes up to, not including, the pn field
    uint64_t pn = 0;
    size_t pn_len = 0;  // 1..4; must agree with the header's low two flag bits
    Bytes payload;
};

struct WirePacket {
    Bytes bytes;
};

std::array<uint8_t, crypto::kIvLen> compute_nonce(const std::array<uint8_t, crypto::kIvLen>& iv,
                                                  uint64_t pn);

// Truncated big-endian encoding of the low pn_len bytes.
void encode_pn(uint64_t pn, size_t pn_len, uint8_t* out);
Bytes encode_pn(uint64_t pn, size_t pn_len);

// Reconstructs the full packet number closest to largest_acked + 1 whose low
// pn_len bytes equal truncated. largest_acked = kNoLargestAcked (-1) means no
// packet has been acknowledged yet.
uint64_t pn_decode(uint64_t truncated, size_t pn_len, int64_t largest_acked);

// Header builders. The first byte carries pn_len - 1 in its low two bits.
Bytes make_short_header(ByteSpan dcid, size_t pn_len, bool key_phase = false, bool spin = false);

// Long-header Initial packet header including the token and the two-byte
// length field covering pn_len + payload_len + tag.
Bytes make_initial_header(ByteSpan dcid, ByteSpan scid, ByteSpan token, size_t pn_len,
                          size_t payload_len);

// Reusable protection state for one direction of one connection: AEAD and
// header-protection contexts are keyed once and reused per packet.
class ProtectionContext {
  public:
    ProtectionContext(crypto::SuiteId suite, crypto::HpAlgId hp_alg, keys::PacketKeys keys);

    crypto::SuiteId suite() const { return suite_; }
    crypto::HpAlgId hp_alg() const { return hp_alg_; }
    const keys::PacketKeys& packet_keys() const { return keys_; }

    WirePacket seal(const PlainPacket& pkt);

    // dcid_len locates the pn field of short-header packets (the wire does
    // not carry it; a connection knows its own CID length). Long headers are
    // parsed from the wire and ignore it.
    PlainPacket open(const WirePacket& wire, int64_t largest_acked, size_t dcid_len = 0);

    // Staged hot path. protect_into writes header ‖ pn ‖ ciphertext ‖ tag
    // without masking and returns the wire size; apply_hp masks in place.
    size_t wire_size(size_t header_len, size_t pn_len, size_t payload_len) const;
    size_t protect_into(std::span<uint8_t> out, ByteSpan header, uint64_t pn, size_t pn_len,
                        ByteSpan payload);
    void apply_hp(std::span<uint8_t> wire, size_t pn_offset);

    // Unmasks in place and returns the recovered pn_len.
    size_t remove_hp(std::span<uint8_t> wire, size_t pn_offset);

    // Decrypts a wire packet whose header protection is already removed.
    size_t open_payload_into(std::span<uint8_t> out, ByteSpan wire, size_t pn_offset,
                             size_t pn_len, uint64_t pn);

    crypto::HpMasker* masker() { return masker_ ? &*masker_ : nullptr; }

  private:
    crypto::SuiteId suite_;
    crypto::HpAlgId hp_alg_;
    keys::PacketKeys keys_;
    crypto::AeadCipher aead_;
    std::optional<crypto::HpMasker> masker_;
};

// One-shot conveniences over a temporary ProtectionContext.
WirePacket seal_packet(const keys::PacketKeys& keys, crypto::SuiteId suite, crypto::HpAlgId hp_alg,
                       const PlainPacket& pkt);
PlainPacket open_packet(const keys::PacketKeys& keys, crypto::SuiteId suite, crypto::HpAlgId hp_alg,
                        const WirePacket& wire, int64_t largest_acked, size_t dcid_len = 0);

// Payload bytes one packet can carry at the given MTU. Throws MtuTooSmall
// when not even one payload byte fits.
size_t packet_capacity(size_t mtu, size_t header_len, size_t pn_len);

// Greedy split of total_len payload bytes into per-packet sizes: every
// packet except possibly the last carries packet_capacity() bytes.
std::vector<size_t> packetize(uint64_t total_len, size_t mtu, size_t header_len, size_t pn_len);

}  // namespace qcl::packet
