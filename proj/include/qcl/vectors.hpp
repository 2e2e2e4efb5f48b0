#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "qcl/bytes.hpp"
#include "qcl/crypto_suites.hpp"
#include "qcl/key_schedule.hpp"

namespace qcl::vectors {

// One protection vector: key material in one of three forms (initial-secret
// derivation from a dcid, a raw traffic secret, or literal key/iv/hp), plus
// the plaintext packet and the expected protected wire bytes.
struct VectorRecord {
    std::string name;
    crypto::SuiteId suite = crypto::SuiteId::AES_128_GCM;
    crypto::HpAlgId hp = crypto::HpAlgId::AES_ECB;

    std::optional<Bytes> dcid;
    keys::Side side = keys::Side::CLIENT;
    std::optional<Bytes> secret;
    std::optional<Bytes> key;
    std::optional<Bytes> iv;
    std::optional<Bytes> hpkey;

    Bytes header;
    uint64_t pn = 0;
    size_t pn_len = 0;
    Bytes payload;
    Bytes wire;
};

// Parses `field: value` records separated by blank lines; '#' starts a
// comment line. Throws ParseError on unknown fields, bad hex, or records
// missing required fields.
std::vector<VectorRecord> parse_vectors(std::istream& in);
std::vector<VectorRecord> load_vectors(const std::string& path);

// Resolves the record's key material to a concrete key triple.
keys::PacketKeys resolve_keys(const VectorRecord& rec);

// Seals the record's plaintext and compares against the expected wire bytes,
// then re-opens the wire and checks the round trip. Throws VectorMismatch
// naming the record and the first differing offset.
void verify_record(const VectorRecord& rec);

// Verifies every record in the file; returns the number verified.
size_t verify_file(const std::string& path);

}  // namespace qcl::vectors
