#include "qcl/crypto_suites.hpp"

#include <algorithm>
#include <cstring>
#include <string>

#include <openssl/evp.h>

#include "qcl/errors.hpp"

namespace qcl::crypto {

namespace {

// ===== registry =====

constexpr CipherSuite kSuites[] = {
    {SuiteId::AES_128_GCM, "AES_128_GCM", 16, kIvLen, kTagLen, HpAlgId::AES_ECB},
    {SuiteId::AES_256_GCM, "AES_256_GCM", 32, kIvLen, kTagLen, HpAlgId::AES_ECB},
    {SuiteId::CHACHA20_POLY1305, "CHACHA20_POLY1305", 32, kIvLen, kTagLen, HpAlgId::CHACHA20_RAW},
    // NOOP mirrors the AES-128-GCM layout so packet sizes and sample offsets
    // are identical to the real baseline suite.
    {SuiteId::NOOP, "NOOP", 16, kIvLen, kTagLen, HpAlgId::NOOP_HP},
};

std::string normalize_name(std::string_view name) {
    std::string out(name);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
        return c == '-' ? '_' : static_cast<char>(std::toupper(c));
    });
    return out;
}

[[noreturn]] void throw_openssl(const char* what) {
    throw Error(std::string("openssl failure in ") + what);
}

const EVP_CIPHER* aead_cipher(SuiteId suite) {
    switch (suite) {
        case SuiteId::AES_128_GCM: return EVP_aes_128_gcm();
        case SuiteId::AES_256_GCM: return EVP_aes_256_gcm();
        case SuiteId::CHACHA20_POLY1305: return EVP_chacha20_poly1305();
        case SuiteId::NOOP: return nullptr;
    }
    throw UnknownSuite("unregistered suite id");
}

void check_key_len(size_t got, size_t want, const char* what) {
    if (got != want) {
        throw KeyLengthMismatch(std::string(what) + ": got " + std::to_string(got) +
                                " bytes, want " + std::to_string(want));
    }
}

}  // namespace

std::span<const CipherSuite> all_suites() { return kSuites; }

const CipherSuite& suite_params(SuiteId id) {
    for (const CipherSuite& s : kSuites) {
        if (s.id == id) return s;
    }
    throw UnknownSuite("unregistered suite id");
}

SuiteId suite_from_name(std::string_view name) {
    std::string n = normalize_name(name);
    for (const CipherSuite& s : kSuites) {
        if (n == s.name) return s.id;
    }
    throw UnknownSuite("unknown suite: " + std::string(name));
}

HpAlgId hp_from_name(std::string_view name) {
    std::string n = normalize_name(name);
    if (n == "AES_ECB") return HpAlgId::AES_ECB;
    if (n == "CHACHA20_RAW") return HpAlgId::CHACHA20_RAW;
    if (n == "NOOP_HP") return HpAlgId::NOOP_HP;
    if (n == "OFF") return HpAlgId::OFF;
    throw UnknownHpAlg("unknown hp algorithm: " + std::string(name));
}

const char* hp_name(HpAlgId id) {
    switch (id) {
        case HpAlgId::AES_ECB: return "AES_ECB";
        case HpAlgId::CHACHA20_RAW: return "CHACHA20_RAW";
        case HpAlgId::NOOP_HP: return "NOOP_HP";
        case HpAlgId::OFF: return "OFF";
    }
    throw UnknownHpAlg("unregistered hp id");
}

size_t hp_key_len(const CipherSuite& suite, HpAlgId hp) {
    switch (hp) {
        case HpAlgId::AES_ECB: return suite.key_len;
        case HpAlgId::CHACHA20_RAW: return 32;
        case HpAlgId::NOOP_HP: return suite.key_len;
        case HpAlgId::OFF: return suite.key_len;
    }
    throw UnknownHpAlg("unregistered hp id");
}

// ===== AEAD contexts =====

struct AeadCipher::Impl {
    const CipherSuite& params;
    Bytes key;
    EVP_CIPHER_CTX* enc = nullptr;
    EVP_CIPHER_CTX* dec = nullptr;

    explicit Impl(const CipherSuite& p, ByteSpan k) : params(p), key(k.begin(), k.end()) {}

    ~Impl() {
        EVP_CIPHER_CTX_free(enc);
        EVP_CIPHER_CTX_free(dec);
    }

    EVP_CIPHER_CTX* context(bool encrypt) {
        EVP_CIPHER_CTX*& ctx = encrypt ? enc : dec;
        if (ctx == nullptr) {
            ctx = EVP_CIPHER_CTX_new();
            if (ctx == nullptr) throw_openssl("EVP_CIPHER_CTX_new");
            const EVP_CIPHER* cipher = aead_cipher(params.id);
            if (EVP_CipherInit_ex(ctx, cipher, nullptr, nullptr, nullptr, encrypt) != 1 ||
                EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_AEAD_SET_IVLEN, kIvLen, nullptr) != 1 ||
                EVP_CipherInit_ex(ctx, nullptr, nullptr, key.data(), nullptr, encrypt) != 1) {
                throw_openssl("AEAD key setup");
            }
        }
        return ctx;
    }
};

AeadCipher::AeadCipher(SuiteId suite, ByteSpan key) : suite_(suite) {
    const CipherSuite& params = suite_params(suite);
    check_key_len(key.size(), params.key_len, params.name);
    impl_ = std::make_unique<Impl>(params, key);
}

AeadCipher::~AeadCipher() = default;
AeadCipher::AeadCipher(AeadCipher&&) noexcept = default;
AeadCipher& AeadCipher::operator=(AeadCipher&&) noexcept = default;

size_t AeadCipher::seal_into(std::span<uint8_t> out, ByteSpan nonce, ByteSpan aad,
                             ByteSpan plaintext) {
    if (nonce.size() != kIvLen) {
        throw KeyLengthMismatch("nonce must be 12 bytes");
    }
    size_t total = plaintext.size() + kTagLen;
    if (out.size() < total) {
        throw TooShort("seal output buffer too small");
    }
    if (suite_ == SuiteId::NOOP) {
        std::memcpy(out.data(), plaintext.data(), plaintext.size());
        std::memset(out.data() + plaintext.size(), 0, kTagLen);
        return total;
    }

    EVP_CIPHER_CTX* ctx = impl_->context(true);
    int outl = 0;
    if (EVP_EncryptInit_ex(ctx, nullptr, nullptr, nullptr, nonce.data()) != 1) {
        throw_openssl("EVP_EncryptInit_ex(iv)");
    }
    if (!aad.empty() &&
        EVP_EncryptUpdate(ctx, nullptr, &outl, aad.data(), static_cast<int>(aad.size())) != 1) {
        throw_openssl("EVP_EncryptUpdate(aad)");
    }
    int ct_len = 0;
    if (!plaintext.empty()) {
        if (EVP_EncryptUpdate(ctx, out.data(), &ct_len, plaintext.data(),
                              static_cast<int>(plaintext.size())) != 1) {
            throw_openssl("EVP_EncryptUpdate");
        }
    }
    if (EVP_EncryptFinal_ex(ctx, out.data() + ct_len, &outl) != 1) {
        throw_openssl("EVP_EncryptFinal_ex");
    }
    if (EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_AEAD_GET_TAG, kTagLen,
                            out.data() + plaintext.size()) != 1) {
        throw_openssl("EVP_CTRL_AEAD_GET_TAG");
    }
    return total;
}

size_t AeadCipher::open_into(std::span<uint8_t> out, ByteSpan nonce, ByteSpan aad,
                             ByteSpan sealed) {
    if (nonce.size() != kIvLen) {
        throw KeyLengthMismatch("nonce must be 12 bytes");
    }
    if (sealed.size() < kTagLen) {
        throw TooShort("sealed input shorter than the tag");
    }
    size_t pt_len = sealed.size() - kTagLen;
    if (out.size() < pt_len) {
        throw TooShort("open output buffer too small");
    }
    if (suite_ == SuiteId::NOOP) {
        // NOOP performs no authentication: any tag is accepted.
        std::memcpy(out.data(), sealed.data(), pt_len);
        return pt_len;
    }

    EVP_CIPHER_CTX* ctx = impl_->context(false);
    int outl = 0;
    if (EVP_DecryptInit_ex(ctx, nullptr, nullptr, nullptr, nonce.data()) != 1) {
        throw_openssl("EVP_DecryptInit_ex(iv)");
    }
    if (!aad.empty() &&
        EVP_DecryptUpdate(ctx, nullptr, &outl, aad.data(), static_cast<int>(aad.size())) != 1) {
        throw_openssl("EVP_DecryptUpdate(aad)");
    }
    int written = 0;
    if (pt_len > 0) {
        if (EVP_DecryptUpdate(ctx, out.data(), &written, sealed.data(),
                              static_cast<int>(pt_len)) != 1) {
            throw_openssl("EVP_DecryptUpdate");
        }
    }
    uint8_t tag[kTagLen];
    std::memcpy(tag, sealed.data() + pt_len, kTagLen);
    if (EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_AEAD_SET_TAG, kTagLen, tag) != 1) {
        throw_openssl("EVP_CTRL_AEAD_SET_TAG");
    }
    if (EVP_DecryptFinal_ex(ctx, out.data() + written, &outl) != 1) {
        throw AuthFailure("AEAD tag verification failed");
    }
    return pt_len;
}

Bytes aead_seal(SuiteId suite, ByteSpan key, ByteSpan nonce, ByteSpan aad, ByteSpan plaintext) {
    AeadCipher cipher(suite, key);
    Bytes out(plaintext.size() + kTagLen);
    cipher.seal_into(out, nonce, aad, plaintext);
    return out;
}

Bytes aead_open(SuiteId suite, ByteSpan key, ByteSpan nonce, ByteSpan aad, ByteSpan sealed) {
    AeadCipher cipher(suite, key);
    if (sealed.size() < kTagLen) {
        throw TooShort("sealed input shorter than the tag");
    }
    Bytes out(sealed.size() - kTagLen);
    cipher.open_into(out, nonce, aad, sealed);
    return out;
}

// ===== header protection contexts =====

struct HpMasker::Impl {
    Bytes key;
    EVP_CIPHER_CTX* ctx = nullptr;
    Bytes scratch;

    explicit Impl(ByteSpan k) : key(k.begin(), k.end()) {}

    ~Impl() { EVP_CIPHER_CTX_free(ctx); }

    EVP_CIPHER_CTX* ecb_context() {
        if (ctx == nullptr) {
            ctx = EVP_CIPHER_CTX_new();
            if (ctx == nullptr) throw_openssl("EVP_CIPHER_CTX_new");
            const EVP_CIPHER* cipher = key.size() == 16 ? EVP_aes_128_ecb() : EVP_aes_256_ecb();
            if (EVP_EncryptInit_ex(ctx, cipher, nullptr, key.data(), nullptr) != 1) {
                throw_openssl("AES-ECB key setup");
            }
            EVP_CIPHER_CTX_set_padding(ctx, 0);
        }
        return ctx;
    }

    EVP_CIPHER_CTX* chacha_context() {
        if (ctx == nullptr) {
            ctx = EVP_CIPHER_CTX_new();
            if (ctx == nullptr) throw_openssl("EVP_CIPHER_CTX_new");
            if (EVP_EncryptInit_ex(ctx, EVP_chacha20(), nullptr, key.data(), nullptr) != 1) {
                throw_openssl("ChaCha20 key setup");
            }
        }
        return ctx;
    }
};

HpMasker::HpMasker(HpAlgId alg, ByteSpan hp_key) : alg_(alg) {
    switch (alg) {
        case HpAlgId::AES_ECB:
            if (hp_key.size() != 16 && hp_key.size() != 32) {
                throw KeyLengthMismatch("AES_ECB hp key must be 16 or 32 bytes");
            }
            break;
        case HpAlgId::CHACHA20_RAW:
            check_key_len(hp_key.size(), 32, "CHACHA20_RAW hp key");
            break;
        case HpAlgId::NOOP_HP:
            break;
        case HpAlgId::OFF:
            throw UnknownHpAlg("OFF selects no masking stage; no masker exists");
    }
    impl_ = std::make_unique<Impl>(hp_key);
}

HpMasker::~HpMasker() = default;
HpMasker::HpMasker(HpMasker&&) noexcept = default;
HpMasker& HpMasker::operator=(HpMasker&&) noexcept = default;

Mask HpMasker::mask(Sample sample) {
    Mask out{};
    switch (alg_) {
        case HpAlgId::AES_ECB: {
            EVP_CIPHER_CTX* ctx = impl_->ecb_context();
            uint8_t block[kSampleLen];
            int outl = 0;
            if (EVP_EncryptUpdate(ctx, block, &outl, sample.data(), kSampleLen) != 1) {
                throw_openssl("AES-ECB EVP_EncryptUpdate");
            }
            std::memcpy(out.data(), block, kMaskLen);
            return out;
        }
        case HpAlgId::CHACHA20_RAW: {
            // The 16-byte sample feeds OpenSSL's ChaCha20 IV directly: the
            // first 4 bytes are the little-endian block counter and the
            // remaining 12 bytes the nonce.
            EVP_CIPHER_CTX* ctx = impl_->chacha_context();
            if (EVP_EncryptInit_ex(ctx, nullptr, nullptr, nullptr, sample.data()) != 1) {
                throw_openssl("ChaCha20 EVP_EncryptInit_ex(iv)");
            }
            static constexpr uint8_t zeros[kMaskLen] = {};
            int outl = 0;
            if (EVP_EncryptUpdate(ctx, out.data(), &outl, zeros, kMaskLen) != 1) {
                throw_openssl("ChaCha20 EVP_EncryptUpdate");
            }
            return out;
        }
        case HpAlgId::NOOP_HP:
            return out;
        case HpAlgId::OFF:
            break;
    }
    throw UnknownHpAlg("OFF has no mask");
}

void HpMasker::mask_many(ByteSpan samples, std::span<uint8_t> masks_out) {
    if (samples.size() % kSampleLen != 0) {
        throw TooShort("sample run must be a multiple of 16 bytes");
    }
    size_t n = samples.size() / kSampleLen;
    if (masks_out.size() < n * kMaskLen) {
        throw TooShort("mask output buffer too small");
    }
    if (alg_ == HpAlgId::AES_ECB && n > 0) {
        // ECB has no chaining, so one pass over the gathered samples yields
        // exactly the per-sample masks at primitive cost.
        impl_->scratch.resize(samples.size());
        EVP_CIPHER_CTX* ctx = impl_->ecb_context();
        int outl = 0;
        if (EVP_EncryptUpdate(ctx, impl_->scratch.data(), &outl, samples.data(),
                              static_cast<int>(samples.size())) != 1) {
            throw_openssl("AES-ECB EVP_EncryptUpdate");
        }
        for (size_t i = 0; i < n; ++i) {
            std::memcpy(masks_out.data() + i * kMaskLen, impl_->scratch.data() + i * kSampleLen,
                        kMaskLen);
        }
        return;
    }
    if (alg_ == HpAlgId::NOOP_HP) {
        std::memset(masks_out.data(), 0, n * kMaskLen);
        return;
    }
    for (size_t i = 0; i < n; ++i) {
        Mask m = mask(samples.subspan(i * kSampleLen).first<kSampleLen>());
        std::memcpy(masks_out.data() + i * kMaskLen, m.data(), kMaskLen);
    }
}

Mask hp_mask(HpAlgId alg, ByteSpan hp_key, Sample sample) {
    HpMasker masker(alg, hp_key);
    return masker.mask(sample);
}

}  // namespace qcl::crypto
