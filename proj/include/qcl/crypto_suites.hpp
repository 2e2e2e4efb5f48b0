#pragma once

// AEAD cipher suites and header-protection algorithms for the QUIC v1
// protection pipeline. Real primitives are backed by OpenSSL's EVP layer;
// the NOOP suite copies plaintext through unchanged so the rest of the
// pipeline can be measured without cryptographic cost.

#include <array>
#include <cstddef>
#include <memory>
#include <string_view>

#include "qcl/bytes.hpp"

namespace qcl::crypto {

inline constexpr size_t kIvLen = 12;
inline constexpr size_t kTagLen = 16;
inline constexpr size_t kSampleLen = 16;
inline constexpr size_t kMaskLen = 5;

enum class SuiteId { AES_128_GCM, AES_256_GCM, CHACHA20_POLY1305, NOOP };

// OFF is a pipeline selection, not an algorithm: it skips the masking stage
// entirely. The three real algorithms each consume a 16-byte ciphertext
// sample and produce a 5-byte mask.
enum class HpAlgId { AES_ECB, CHACHA20_RAW, NOOP_HP, OFF };

struct CipherSuite {
    SuiteId id;
    const char* name;
    size_t key_len;
    size_t iv_len;
    size_t tag_len;
    HpAlgId default_hp;
};

using Sample = std::span<const uint8_t, kSampleLen>;
using Mask = std::array<uint8_t, kMaskLen>;

std::span<const CipherSuite> all_suites();
const CipherSuite& suite_params(SuiteId id);
SuiteId suite_from_name(std::string_view name);  // throws UnknownSuite
HpAlgId hp_from_name(std::string_view name);     // throws UnknownHpAlg
const char* hp_name(HpAlgId id);

// Length of the "quic hp" key derived for a (suite, hp_alg) pairing. AES_ECB
// keys track the suite's AEAD key length (AES-128 vs AES-256 masking);
// CHACHA20_RAW always takes 32 bytes; NOOP_HP and OFF mirror the suite so
// switching the masking stage changes no derivation path.
size_t hp_key_len(const CipherSuite& suite, HpAlgId hp);

// One-shot operations, used by tests and the vector verifier. The sealed
// buffer is ciphertext followed by the 16-byte tag. NOOP returns the
// plaintext as ciphertext with an all-zero tag and accepts any tag on open.
Bytes aead_seal(SuiteId suite, ByteSpan key, ByteSpan nonce, ByteSpan aad, ByteSpan plaintext);
Bytes aead_open(SuiteId suite, ByteSpan key, ByteSpan nonce, ByteSpan aad, ByteSpan sealed);
Mask hp_mask(HpAlgId alg, ByteSpan hp_key, Sample sample);

// Reusable keyed AEAD context for the per-packet hot path: the cipher key
// schedule is installed once and each packet only resets the nonce.
class AeadCipher {
  public:
    AeadCipher(SuiteId suite, ByteSpan key);  // throws KeyLengthMismatch
    ~AeadCipher();
    AeadCipher(AeadCipher&&) noexcept;
    AeadCipher& operator=(AeadCipher&&) noexcept;
    AeadCipher(const AeadCipher&) = delete;
    AeadCipher& operator=(const AeadCipher&) = delete;

    SuiteId suite() const { return suite_; }

    // Writes ciphertext ‖ tag into out (plaintext size + 16 bytes) and
    // returns the number of bytes written. out must not overlap aad.
    size_t seal_into(std::span<uint8_t> out, ByteSpan nonce, ByteSpan aad, ByteSpan plaintext);

    // Writes the recovered plaintext into out and returns its size. Throws
    // TooShort when sealed is smaller than the tag, AuthFailure when the
    // tag does not verify.
    size_t open_into(std::span<uint8_t> out, ByteSpan nonce, ByteSpan aad, ByteSpan sealed);

  private:
    struct Impl;
    SuiteId suite_;
    std::unique_ptr<Impl> impl_;
};

// Reusable keyed header-protection context. mask_many() computes the masks
// for a contiguous run of 16-byte samples; for AES_ECB the whole run is one
// ECB pass, which is how a batching pipeline would amortize the call cost.
class HpMasker {
  public:
    HpMasker(HpAlgId alg, ByteSpan hp_key);  // throws KeyLengthMismatch, UnknownHpAlg for OFF
    ~HpMasker();
    HpMasker(HpMasker&&) noexcept;
    HpMasker& operator=(HpMasker&&) noexcept;
    HpMasker(const HpMasker&) = delete;
    HpMasker& operator=(const HpMasker&) = delete;

    HpAlgId alg() const { return alg_; }

    Mask mask(Sample sample);

    // samples.size() must be a multiple of 16; masks_out must hold 5 bytes
    // per sample. Results are byte-identical to per-sample mask() calls.
    void mask_many(ByteSpan samples, std::span<uint8_t> masks_out);

  private:
    struct Impl;
    HpAlgId alg_;
    std::unique_ptr<Impl> impl_;
};

}  // namespace qcl::crypto
