#pragma once

// HKDF-SHA256 key schedule: TLS 1.3 HKDF-Expand-Label on top of extract and
// expand, the QUIC v1 initial-secret derivation from a client destination
// connection ID, and per-direction packet key derivation.

#include <array>
#include <string_view>
#include <utility>

#include "qcl/bytes.hpp"
#include "qcl/crypto_suites.hpp"

namespace qcl::keys {

inline constexpr size_t kSecretLen = 32;
inline constexpr size_t kMinConnectionIdLen = 1;
inline constexpr size_t kMaxConnectionIdLen = 20;

enum class Side { CLIENT, SERVER };
enum class Level { INITIAL, HANDSHAKE, APPLICATION };

struct TrafficSecret {
    std::array<uint8_t, kSecretLen> secret{};
    Side side = Side::CLIENT;
    Level level = Level::APPLICATION;
};

struct PacketKeys {
    Bytes key;                            // suite.key_len bytes
    std::array<uint8_t, crypto::kIvLen> iv{};
    Bytes hp;                             // hp_key_len(suite, hp_alg) bytes
};

std::array<uint8_t, kSecretLen> hkdf_extract(ByteSpan salt, ByteSpan ikm);
Bytes hkdf_expand(ByteSpan prk, ByteSpan info, size_t length);

// TLS 1.3 label framing: two-byte output length, then the label prefixed
// with "tls13 " as a length-prefixed string, then a length-prefixed context.
Bytes hkdf_expand_label(ByteSpan secret, std::string_view label, ByteSpan context, size_t length);

// Expands "quic key" / "quic iv" / "quic hp" from one traffic secret. The
// NOOP suite derives real-looking keys through the same schedule so that
// switching suites changes no other code path.
PacketKeys derive_packet_keys(const TrafficSecret& secret, const crypto::CipherSuite& suite,
                              crypto::HpAlgId hp_alg);

// QUIC v1 initial secrets from the client's destination connection ID.
// Returns {client, server}. Throws InvalidConnectionIdLength unless the
// DCID is 1 to 20 bytes.
std::pair<TrafficSecret, TrafficSecret> derive_initial_secrets(ByteSpan dcid);

}  // namespace qcl::keys
