#include "qcl/vectors.hpp"

#include <fstream>
#include <sstream>

#include "qcl/errors.hpp"
#include "qcl/packet_protection.hpp"

namespace qcl::vectors {

namespace {

std::string trim(const std::string& s) {
    size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

uint64_t parse_u64(const std::string& value, const std::string& field) {
    try {
        size_t pos = 0;
        uint64_t parsed = std::stoull(value, &pos);
        if (pos != value.size()) {
            throw ParseError("trailing characters in " + field + ": " + value);
        }
        return parsed;
    } catch (const std::invalid_argument&) {
        throw ParseError("not a number in " + field + ": " + value);
    } catch (const std::out_of_range&) {
        throw ParseError("number out of range in " + field + ": " + value);
    }
}

void finish_record(std::vector<VectorRecord>& out, VectorRecord& rec, bool& open) {
    if (!open) {
        return;
    }
    if (rec.name.empty()) {
        throw ParseError("vector record missing name field");
    }
    bool has_raw = rec.key && rec.iv && rec.hpkey;
    if (!rec.dcid && !rec.secret && !has_raw) {
        throw ParseError("vector '" + rec.name + "' has no key material (dcid, secret, or key/iv/hpkey)");
    }
    if (rec.header.empty() || rec.pn_len == 0 || rec.wire.empty()) {
        throw ParseError("vector '" + rec.name + "' missing header, pn_len, or wire");
    }
    out.push_back(std::move(rec));
    rec = VectorRecord{};
    open = false;
}

}  // namespace

std::vector<VectorRecord> parse_vectors(std::istream& in) {
    std::vector<VectorRecord> out;
    VectorRecord rec;
    bool open = false;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty()) {
            finish_record(out, rec, open);
            continue;
        }
        if (t[0] == '#') {
            continue;
        }
        size_t colon = t.find(':');
        if (colon == std::string::npos) {
            throw ParseError("line " + std::to_string(lineno) + ": expected 'field: value'");
        }
        std::string field = trim(t.substr(0, colon));
        std::string value = trim(t.substr(colon + 1));
        open = true;
        if (field == "name") {
            rec.name = value;
        } else if (field == "suite") {
            rec.suite = crypto::suite_from_name(value);
        } else if (field == "hp") {
            rec.hp = crypto::hp_from_name(value);
        } else if (field == "dcid") {
            rec.dcid = from_hex(value);
        } else if (field == "side") {
            if (value == "client") {
                rec.side = keys::Side::CLIENT;
            } else if (value == "server") {
                rec.side = keys::Side::SERVER;
            } else {
                throw ParseError("line " + std::to_string(lineno) + ": side must be client or server");
            }
        } else if (field == "secret") {
            rec.secret = from_hex(value);
        } else if (field == "key") {
            rec.key = from_hex(value);
        } else if (field == "iv") {
            rec.iv = from_hex(value);
        } else if (field == "hpkey") {
            rec.hpkey = from_hex(value);
        } else if (field == "header") {
            rec.header = from_hex(value);
        } else if (field == "pn") {
            rec.pn = parse_u64(value, "pn");
        } else if (field == "pn_len") {
            rec.pn_len = parse_u64(value, "pn_len");
        } else if (field == "payload") {
            rec.payload = from_hex(value);
        } else if (field == "wire") {
            rec.wire = from_hex(value);
        } else {
            throw ParseError("line " + std::to_string(lineno) + ": unknown field '" + field + "'");
        }
    }
    finish_record(out, rec, open);
    return out;
}

std::vector<VectorRecord> load_vectors(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open vector file: " + path);
    }
    return parse_vectors(in);
}

keys::PacketKeys resolve_keys(const VectorRecord& rec) {
    if (rec.key && rec.iv && rec.hpkey) {
        if (rec.iv->size() != crypto::kIvLen) {
            throw ParseError("vector '" + rec.name + "': iv must be 12 bytes");
        }
        keys::PacketKeys out;
        out.key = *rec.key;
        std::copy(rec.iv->begin(), rec.iv->end(), out.iv.begin());
        out.hp = *rec.hpkey;
        return out;
    }
    if (rec.secret) {
        if (rec.secret->size() != keys::kSecretLen) {
            throw ParseError("vector '" + rec.name + "': secret must be 32 bytes");
        }
        keys::TrafficSecret ts;
        std::copy(rec.secret->begin(), rec.secret->end(), ts.secret.begin());
        ts.side = rec.side;
        ts.level = keys::Level::APPLICATION;
        return keys::derive_packet_keys(ts, crypto::suite_params(rec.suite), rec.hp);
    }
    auto [client, server] = keys::derive_initial_secrets(*rec.dcid);
    const keys::TrafficSecret& ts = rec.side == keys::Side::CLIENT ? client : server;
    return keys::derive_packet_keys(ts, crypto::suite_params(rec.suite), rec.hp);
}

void verify_record(const VectorRecord& rec) {
    keys::PacketKeys pk = resolve_keys(rec);
    packet::ProtectionContext ctx(rec.suite, rec.hp, pk);

    packet::PlainPacket plain;
    plain.header = rec.header;
    plain.pn = rec.pn;
    plain.pn_len = rec.pn_len;
    plain.payload = rec.payload;
    packet::WirePacket sealed = ctx.seal(plain);

    if (sealed.bytes != rec.wire) {
        size_t limit = std::min(sealed.bytes.size(), rec.wire.size());
        size_t diff = limit;
        for (size_t i = 0; i < limit; ++i) {
            if (sealed.bytes[i] != rec.wire[i]) {
                diff = i;
                break;
            }
        }
        std::ostringstream msg;
        msg << "vector '" << rec.name << "': sealed packet differs from expected wire at byte "
            << diff << " (got " << sealed.bytes.size() << " bytes, expected " << rec.wire.size()
            << ")";
        throw VectorMismatch(msg.str());
    }

    size_t dcid_len = (rec.header[0] & 0x80) ? 0 : rec.header.size() - 1;
    packet::PlainPacket reopened =
        ctx.open(sealed, static_cast<int64_t>(rec.pn) - 1, dcid_len);
    if (reopened.header != rec.header || reopened.pn != rec.pn ||
        reopened.pn_len != rec.pn_len || reopened.payload != rec.payload) {
        throw VectorMismatch("vector '" + rec.name + "': round trip did not restore the packet");
    }
}

size_t verify_file(const std::string& path) {
    std::vector<VectorRecord> records = load_vectors(path);
    for (const VectorRecord& rec : records) {
        verify_record(rec);
    }
    return records.size();
}

}  // namespace qcl::vectors
