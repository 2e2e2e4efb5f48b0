#include "qcl/key_schedule.hpp"

#include <cstring>

#include <openssl/hmac.h>

#include "qcl/errors.hpp"

namespace qcl::keys {

namespace {

// QUIC v1 initial salt (RFC 9001).
constexpr uint8_t kInitialSalt[] = {0x38, 0x76, 0x2c, 0xf7, 0xf5, 0x59, 0x34, 0xb3, 0x4d, 0x17,
                                    0x9a, 0xe6, 0xa4, 0xc8, 0x0c, 0xad, 0xcc, 0xbb, 0x7f, 0x0a};

std::array<uint8_t, kSecretLen> hmac_sha256(ByteSpan key, ByteSpan data) {
    std::array<uint8_t, kSecretLen> out{};
    unsigned int out_len = 0;
    if (HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(),
             out.data(), &out_len) == nullptr ||
        out_len != kSecretLen) {
        throw Error("openssl failure in HMAC-SHA256");
    }
    return out;
}

}  // namespace

std::array<uint8_t, kSecretLen> hkdf_extract(ByteSpan salt, ByteSpan ikm) {
    return hmac_sha256(salt, ikm);
}

Bytes hkdf_expand(ByteSpan prk, ByteSpan info, size_t length) {
    if (length > 255 * kSecretLen) {
        throw Error("hkdf_expand output length too large");
    }
    Bytes out;
    out.reserve(length);
    std::array<uint8_t, kSecretLen> block{};
    Bytes input;
    uint8_t counter = 1;
    while (out.size() < length) {
        input.clear();
        if (counter > 1) {
            input.insert(input.end(), block.begin(), block.end());
        }
        input.insert(input.end(), info.begin(), info.end());
        input.push_back(counter);
        block = hmac_sha256(prk, input);
        size_t take = std::min(length - out.size(), block.size());
        out.insert(out.end(), block.begin(), block.begin() + take);
        ++counter;
    }
    return out;
}

Bytes hkdf_expand_label(ByteSpan secret, std::string_view label, ByteSpan context, size_t length) {
    Bytes info;
    info.reserve(4 + 6 + label.size() + context.size());
    info.push_back(static_cast<uint8_t>(length >> 8));
    info.push_back(static_cast<uint8_t>(length & 0xff));
    info.push_back(static_cast<uint8_t>(6 + label.size()));
    static constexpr char kPrefix[] = "tls13 ";
    info.insert(info.end(), kPrefix, kPrefix + 6);
    info.insert(info.end(), label.begin(), label.end());
    info.push_back(static_cast<uint8_t>(context.size()));
    info.insert(info.end(), context.begin(), context.end());
    return hkdf_expand(secret, info, length);
}

PacketKeys derive_packet_keys(const TrafficSecret& secret, const crypto::CipherSuite& suite,
                              crypto::HpAlgId hp_alg) {
    PacketKeys out;
    out.key = hkdf_expand_label(secret.secret, "quic key", {}, suite.key_len);
    Bytes iv = hkdf_expand_label(secret.secret, "quic iv", {}, suite.iv_len);
    std::memcpy(out.iv.data(), iv.data(), iv.size());
    out.hp = hkdf_expand_label(secret.secret, "quic hp", {}, crypto::hp_key_len(suite, hp_alg));
    return out;
}

std::pair<TrafficSecret, TrafficSecret> derive_initial_secrets(ByteSpan dcid) {
    if (dcid.size() < kMinConnectionIdLen || dcid.size() > kMaxConnectionIdLen) {
        throw InvalidConnectionIdLength("destination connection id must be 1 to 20 bytes, got " +
                                        std::to_string(dcid.size()));
    }
    std::array<uint8_t, kSecretLen> initial = hkdf_extract(kInitialSalt, dcid);

    TrafficSecret client{{}, Side::CLIENT, Level::INITIAL};
    Bytes c = hkdf_expand_label(initial, "client in", {}, kSecretLen);
    std::memcpy(client.secret.data(), c.data(), kSecretLen);

    TrafficSecret server{{}, Side::SERVER, Level::INITIAL};
    Bytes s = hkdf_expand_label(initial, "server in", {}, kSecretLen);
    std::memcpy(server.secret.data(), s.data(), kSecretLen);

    return {client, server};
}

}  // namespace qcl::keys
