#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <random>
#include <string>

#include "qcl/bytes.hpp"
#include "qcl/crypto_suites.hpp"
#include "qcl/errors.hpp"

using namespace qcl;
using namespace qcl::crypto;

namespace {

Bytes random_bytes(std::mt19937_64& rng, size_t n) {
    Bytes out(n);
    for (auto& b : out) {
        b = static_cast<uint8_t>(rng());
    }
    return out;
}

Sample as_sample(const Bytes& b) {
    return Sample(b.data(), kSampleLen);
}

}  // namespace

TEST_CASE("suite registry lists the four suites with fixed lengths") {
    auto suites = all_suites();
    REQUIRE(suites.size() == 4);

    const CipherSuite& aes128 = suite_params(SuiteId::AES_128_GCM);
    CHECK(std::string(aes128.name) == "AES_128_GCM");
    CHECK(aes128.key_len == 16);

    const CipherSuite& aes256 = suite_params(SuiteId::AES_256_GCM);
    CHECK(std::string(aes256.name) == "AES_256_GCM");
    CHECK(aes256.key_len == 32);

    const CipherSuite& chacha = suite_params(SuiteId::CHACHA20_POLY1305);
    CHECK(std::string(chacha.name) == "CHACHA20_POLY1305");
    CHECK(chacha.key_len == 32);

    const CipherSuite& noop = suite_params(SuiteId::NOOP);
    CHECK(std::string(noop.name) == "NOOP");
    CHECK(noop.key_len == 16);

    for (const auto& s : suites) {
        CHECK(s.iv_len == 12);
        CHECK(s.tag_len == 16);
        CHECK(&suite_params(s.id) == &s);
        CHECK(suite_from_name(s.name) == s.id);
    }
}

TEST_CASE("suite and hp lookups reject unknown names") {
    CHECK_THROWS_AS(suite_from_name("AES_128_CBC"), UnknownSuite);
    CHECK_THROWS_AS(suite_from_name(""), UnknownSuite);
    CHECK_THROWS_AS(hp_from_name("SALSA20"), UnknownHpAlg);
    CHECK(hp_from_name("AES_ECB") == HpAlgId::AES_ECB);
    CHECK(hp_from_name("CHACHA20_RAW") == HpAlgId::CHACHA20_RAW);
    CHECK(hp_from_name("NOOP_HP") == HpAlgId::NOOP_HP);
    CHECK(hp_from_name("OFF") == HpAlgId::OFF);
    for (HpAlgId id : {HpAlgId::AES_ECB, HpAlgId::CHACHA20_RAW, HpAlgId::NOOP_HP, HpAlgId::OFF}) {
        CHECK(hp_from_name(hp_name(id)) == id);
    }
}

TEST_CASE("hp_key_len follows the masking algorithm, not only the suite") {
    const CipherSuite& aes128 = suite_params(SuiteId::AES_128_GCM);
    const CipherSuite& aes256 = suite_params(SuiteId::AES_256_GCM);
    const CipherSuite& chacha = suite_params(SuiteId::CHACHA20_POLY1305);
    const CipherSuite& noop = suite_params(SuiteId::NOOP);

    CHECK(hp_key_len(aes128, HpAlgId::AES_ECB) == 16);
    CHECK(hp_key_len(aes256, HpAlgId::AES_ECB) == 32);
    CHECK(hp_key_len(noop, HpAlgId::AES_ECB) == 16);

    CHECK(hp_key_len(aes128, HpAlgId::CHACHA20_RAW) == 32);
    CHECK(hp_key_len(aes256, HpAlgId::CHACHA20_RAW) == 32);
    CHECK(hp_key_len(noop, HpAlgId::CHACHA20_RAW) == 32);

    CHECK(hp_key_len(aes128, HpAlgId::NOOP_HP) == 16);
    CHECK(hp_key_len(chacha, HpAlgId::NOOP_HP) == 32);
    CHECK(hp_key_len(aes128, HpAlgId::OFF) == 16);
    CHECK(hp_key_len(chacha, HpAlgId::OFF) == 32);
}

TEST_CASE("NOOP seal appends a zero tag and keeps the plaintext visible") {
    Bytes key(16, 0x00);
    Bytes nonce(12, 0x00);
    Bytes plaintext = {0x00, 0x01, 0x02};

    Bytes sealed = aead_seal(SuiteId::NOOP, key, nonce, {}, plaintext);
    REQUIRE(sealed.size() == plaintext.size() + kTagLen);
    CHECK(Bytes(sealed.begin(), sealed.begin() + 3) == plaintext);
    CHECK(std::all_of(sealed.begin() + 3, sealed.end(), [](uint8_t b) { return b == 0; }));
}

TEST_CASE("NOOP open returns the prefix and accepts any tag bytes") {
    Bytes key(16, 0x11);
    Bytes nonce(12, 0x22);
    Bytes sealed = {'h', 'i'};
    sealed.resize(2 + kTagLen, 0x00);

    Bytes opened = aead_open(SuiteId::NOOP, key, nonce, {}, sealed);
    CHECK(opened == Bytes{'h', 'i'});

    sealed[5] = 0xff;
    sealed[17] = 0xa5;
    CHECK(aead_open(SuiteId::NOOP, key, nonce, {}, sealed) == Bytes{'h', 'i'});
}

TEST_CASE("AES-128-GCM with an all-zero key and nonce matches the known empty-message tag") {
    Bytes key(16, 0x00);
    Bytes nonce(12, 0x00);
    Bytes sealed = aead_seal(SuiteId::AES_128_GCM, key, nonce, {}, {});
    REQUIRE(sealed.size() == kTagLen);
    CHECK(to_hex(sealed) == "58e2fccefa7e3061367f1d57a4e7455a");
}

TEST_CASE("seal then open round-trips for every suite") {
    std::mt19937_64 rng(0x5ca1ab1e);
    for (SuiteId id :
         {SuiteId::AES_128_GCM, SuiteId::AES_256_GCM, SuiteId::CHACHA20_POLY1305, SuiteId::NOOP}) {
        const CipherSuite& suite = suite_params(id);
        for (int i = 0; i < 50; ++i) {
            Bytes key = random_bytes(rng, suite.key_len);
            Bytes nonce = random_bytes(rng, kIvLen);
            Bytes aad = random_bytes(rng, rng() % 64);
            Bytes plaintext = random_bytes(rng, rng() % 512);

            Bytes sealed = aead_seal(id, key, nonce, aad, plaintext);
            REQUIRE(sealed.size() == plaintext.size() + kTagLen);
            CHECK(aead_open(id, key, nonce, aad, sealed) == plaintext);
        }
    }
}

TEST_CASE("authenticated suites reject tampered ciphertext, tag, and aad") {
    std::mt19937_64 rng(0xdecafbad);
    for (SuiteId id : {SuiteId::AES_128_GCM, SuiteId::AES_256_GCM, SuiteId::CHACHA20_POLY1305}) {
        const CipherSuite& suite = suite_params(id);
        Bytes key = random_bytes(rng, suite.key_len);
        Bytes nonce = random_bytes(rng, kIvLen);
        Bytes aad = random_bytes(rng, 17);
        Bytes plaintext = random_bytes(rng, 100);
        Bytes sealed = aead_seal(id, key, nonce, aad, plaintext);

        Bytes ct_flip = sealed;
        ct_flip[3] ^= 0x01;
        CHECK_THROWS_AS(aead_open(id, key, nonce, aad, ct_flip), AuthFailure);

        Bytes tag_flip = sealed;
        tag_flip[sealed.size() - 1] ^= 0x80;
        CHECK_THROWS_AS(aead_open(id, key, nonce, aad, tag_flip), AuthFailure);

        Bytes aad_flip = aad;
        aad_flip[0] ^= 0x01;
        CHECK_THROWS_AS(aead_open(id, key, nonce, aad_flip, sealed), AuthFailure);
    }
}

TEST_CASE("aead_open rejects inputs shorter than one tag") {
    Bytes key(16, 0x00);
    Bytes nonce(12, 0x00);
    Bytes short_input(kTagLen - 1, 0x00);
    CHECK_THROWS_AS(aead_open(SuiteId::AES_128_GCM, key, nonce, {}, short_input), TooShort);
    CHECK_THROWS_AS(aead_open(SuiteId::NOOP, key, nonce, {}, short_input), TooShort);
}

TEST_CASE("aead functions verify key and nonce lengths") {
    Bytes short_key(15, 0x00);
    Bytes nonce(12, 0x00);
    CHECK_THROWS_AS(aead_seal(SuiteId::AES_128_GCM, short_key, nonce, {}, {}), KeyLengthMismatch);
    Bytes key(16, 0x00);
    Bytes bad_nonce(11, 0x00);
    CHECK_THROWS_AS(aead_seal(SuiteId::AES_128_GCM, key, bad_nonce, {}, {}), KeyLengthMismatch);
    CHECK_THROWS_AS(AeadCipher(SuiteId::AES_256_GCM, key), KeyLengthMismatch);
}

TEST_CASE("hp_mask matches the pinned single-block values") {
    Bytes zero16(16, 0x00);
    Bytes zero32(32, 0x00);
    Bytes zero_sample(kSampleLen, 0x00);

    Mask aes = hp_mask(HpAlgId::AES_ECB, zero16, as_sample(zero_sample));
    CHECK(to_hex(ByteSpan(aes.data(), aes.size())) == "66e94bd4ef");

    // ChaCha20 sample: counter 1 (little endian) then an all-zero nonce, so
    // the mask is the start of the zero-key keystream's second block.
    Bytes ctr1_sample = {0x01, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
                         0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00};
    Mask chacha = hp_mask(HpAlgId::CHACHA20_RAW, zero32, as_sample(ctr1_sample));
    CHECK(to_hex(ByteSpan(chacha.data(), chacha.size())) == "9f07e7be55");

    Mask noop = hp_mask(HpAlgId::NOOP_HP, zero16, as_sample(ctr1_sample));
    CHECK(to_hex(ByteSpan(noop.data(), noop.size())) == "0000000000");
}

TEST_CASE("hp_mask is deterministic and depends on the sample") {
    std::mt19937_64 rng(7);
    Bytes key = random_bytes(rng, 16);
    Bytes sample_a = random_bytes(rng, kSampleLen);
    Bytes sample_b = sample_a;
    sample_b[0] ^= 0x01;

    Mask a1 = hp_mask(HpAlgId::AES_ECB, key, as_sample(sample_a));
    Mask a2 = hp_mask(HpAlgId::AES_ECB, key, as_sample(sample_a));
    Mask b = hp_mask(HpAlgId::AES_ECB, key, as_sample(sample_b));
    CHECK(a1 == a2);
    CHECK(a1 != b);
}

TEST_CASE("hp_mask validates key lengths and rejects OFF") {
    Bytes sample(kSampleLen, 0x00);
    Bytes key15(15, 0x00);
    Bytes key16(16, 0x00);
    Bytes key31(31, 0x00);
    CHECK_THROWS_AS(hp_mask(HpAlgId::AES_ECB, key15, as_sample(sample)), KeyLengthMismatch);
    CHECK_THROWS_AS(hp_mask(HpAlgId::CHACHA20_RAW, key31, as_sample(sample)), KeyLengthMismatch);
    CHECK_THROWS_AS(hp_mask(HpAlgId::OFF, key16, as_sample(sample)), UnknownHpAlg);
    CHECK_THROWS_AS(HpMasker(HpAlgId::OFF, key16), UnknownHpAlg);

    // AES_ECB accepts both AES-128 and AES-256 key lengths.
    Bytes key32(32, 0x00);
    CHECK_NOTHROW(hp_mask(HpAlgId::AES_ECB, key32, as_sample(sample)));
}

TEST_CASE("AeadCipher reuse matches the one-shot functions") {
    std::mt19937_64 rng(99);
    for (SuiteId id :
         {SuiteId::AES_128_GCM, SuiteId::AES_256_GCM, SuiteId::CHACHA20_POLY1305, SuiteId::NOOP}) {
        const CipherSuite& suite = suite_params(id);
        Bytes key = random_bytes(rng, suite.key_len);
        AeadCipher cipher(id, key);
        REQUIRE(cipher.suite() == id);

        for (int i = 0; i < 20; ++i) {
            Bytes nonce = random_bytes(rng, kIvLen);
            Bytes aad = random_bytes(rng, 20);
            Bytes plaintext = random_bytes(rng, 64 + (rng() % 64));

            Bytes expected = aead_seal(id, key, nonce, aad, plaintext);
            Bytes out(plaintext.size() + kTagLen);
            size_t n = cipher.seal_into(out, nonce, aad, plaintext);
            REQUIRE(n == expected.size());
            CHECK(out == expected);

            Bytes recovered(plaintext.size());
            size_t m = cipher.open_into(recovered, nonce, aad, out);
            REQUIRE(m == plaintext.size());
            CHECK(recovered == plaintext);
        }
    }
}

TEST_CASE("HpMasker reuse and mask_many match per-sample hp_mask") {
    std::mt19937_64 rng(0xfeed);
    struct Case {
        HpAlgId alg;
        size_t key_len;
    };
    for (Case c : {Case{HpAlgId::AES_ECB, 16}, Case{HpAlgId::AES_ECB, 32},
                   Case{HpAlgId::CHACHA20_RAW, 32}, Case{HpAlgId::NOOP_HP, 16}}) {
        Bytes key = random_bytes(rng, c.key_len);
        HpMasker masker(c.alg, key);
        REQUIRE(masker.alg() == c.alg);

        constexpr size_t kBatch = 37;
        Bytes samples = random_bytes(rng, kBatch * kSampleLen);
        std::vector<uint8_t> masks(kBatch * kMaskLen);
        masker.mask_many(samples, masks);

        for (size_t i = 0; i < kBatch; ++i) {
            Sample s(samples.data() + i * kSampleLen, kSampleLen);
            Mask expected = hp_mask(c.alg, key, s);
            Mask reused = masker.mask(s);
            CHECK(reused == expected);
            CHECK(std::equal(expected.begin(), expected.end(), masks.begin() + i * kMaskLen));
        }
    }
}
