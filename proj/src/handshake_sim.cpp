#include "qcl/handshake_sim.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <ostream>
#include <sstream>

#include "qcl/errors.hpp"
#include "qcl/packet_protection.hpp"

namespace qcl::sim {

namespace {

// UDP payload bytes a handshake CRYPTO packet adds on top of its payload.
constexpr uint64_t kPerPacketOverhead =
    kLongHeaderBytes + kHandshakePnLen + kCryptoFrameOverhead + crypto::kTagLen;

KemSpec make_kem(std::string name, int level, uint64_t pk, uint64_t ct, std::string prov) {
    KemSpec spec;
    spec.name = std::move(name);
    spec.nist_level = level;
    spec.pk_size = pk;
    spec.ct_size = ct;
    spec.provenance = std::move(prov);
    return spec;
}

SigSpec make_sig(std::string name, int level, uint64_t pk, uint64_t sig, std::string prov) {
    SigSpec spec;
    spec.name = std::move(name);
    spec.nist_level = level;
    spec.pk_size = pk;
    spec.sig_size = sig;
    spec.cert_chain_size = pk + sig + kCertOverheadBytes;
    spec.provenance = std::move(prov);
    return spec;
}

std::string normalize_name(const std::string& name) {
    std::string out;
    out.reserve(name.size());
    for (char c : name) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        }
    }
    return out;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            return parts;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
}

std::string trim(const std::string& s) {
    size_t begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) {
        return "";
    }
    size_t end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

uint64_t parse_size(const std::string& value, size_t lineno) {
    try {
        size_t pos = 0;
        uint64_t parsed = std::stoull(value, &pos);
        if (pos != value.size()) {
            throw std::invalid_argument("");
        }
        return parsed;
    } catch (const std::exception&) {
        throw ParseError("catalog line " + std::to_string(lineno) + ": bad number '" + value +
                         "'");
    }
}

}  // namespace

std::string outcome_name(Outcome outcome) {
    switch (outcome) {
        case Outcome::OK:
            return "ok";
        case Outcome::FAILED_PN_WINDOW:
            return "failed_pn_window";
        case Outcome::STALLED_AMPLIFICATION:
            return "stalled_amplification";
    }
    return "unknown";
}

const std::vector<KemSpec>& kem_catalog() {
    static const std::vector<KemSpec> catalog = {
        make_kem("x25519", 1, 32, 32, "RFC 7748: 32-byte Montgomery u-coordinates"),
        make_kem("p256", 1, 65, 65, "SEC1 uncompressed point, 1 + 2*32 bytes"),
        make_kem("p384", 3, 97, 97, "SEC1 uncompressed point, 1 + 2*48 bytes"),
        make_kem("p521", 5, 133, 133, "SEC1 uncompressed point, 1 + 2*66 bytes"),
        make_kem("kyber512", 1, 800, 768, "Kyber round-3 parameter table"),
        make_kem("kyber768", 3, 1184, 1088, "Kyber round-3 parameter table"),
        make_kem("kyber1024", 5, 1568, 1568, "Kyber round-3 parameter table"),
        make_kem("bike-l1", 1, 1541, 1573, "BIKE round-4 parameter table"),
        make_kem("bike-l3", 3, 3083, 3115, "BIKE round-4 parameter table"),
        make_kem("bike-l5", 5, 5122, 5154, "BIKE round-4 parameter table"),
        make_kem("hqc-128", 1, 2249, 4497, "HQC round-4 parameter table"),
        make_kem("hqc-192", 3, 4522, 9042, "HQC round-4 parameter table"),
        make_kem("hqc-256", 5, 7245, 14485, "HQC round-4 parameter table"),
    };
    return catalog;
}

const std::vector<SigSpec>& sig_catalog() {
    static const std::vector<SigSpec> catalog = {
        make_sig("rsa1024", 0, 162, 128, "DER SubjectPublicKeyInfo; modulus-size signature"),
        make_sig("rsa2048", 0, 294, 256, "DER SubjectPublicKeyInfo; modulus-size signature"),
        make_sig("rsa3072", 0, 422, 384, "DER SubjectPublicKeyInfo; modulus-size signature"),
        make_sig("rsa4096", 0, 550, 512, "DER SubjectPublicKeyInfo; modulus-size signature"),
        make_sig("falcon512", 1, 897, 666, "Falcon round-3 table, padded signature format"),
        make_sig("falcon1024", 5, 1793, 1280, "Falcon round-3 table, padded signature format"),
        make_sig("dilithium3", 3, 1952, 3293, "Dilithium round-3 parameter table"),
        make_sig("dilithium5", 5, 2592, 4595, "Dilithium round-3 parameter table"),
        make_sig("sphincs-sha2-128f", 1, 32, 17088, "SPHINCS+ round-3.1 parameter table"),
        make_sig("sphincs-sha2-128s", 1, 32, 7856, "SPHINCS+ round-3.1 parameter table"),
        make_sig("sphincs-sha2-192f", 3, 48, 35664, "SPHINCS+ round-3.1 parameter table"),
        make_sig("sphincs-sha2-192s", 3, 48, 16224, "SPHINCS+ round-3.1 parameter table"),
        make_sig("sphincs-sha2-256f", 5, 64, 49856, "SPHINCS+ round-3.1 parameter table"),
        make_sig("sphincs-sha2-256s", 5, 64, 29792, "SPHINCS+ round-3.1 parameter table"),
        make_sig("sphincs-shake-128f", 1, 32, 17088, "SPHINCS+ round-3.1 parameter table"),
        make_sig("sphincs-shake-128s", 1, 32, 7856, "SPHINCS+ round-3.1 parameter table"),
        make_sig("sphincs-shake-192f", 3, 48, 35664, "SPHINCS+ round-3.1 parameter table"),
        make_sig("sphincs-shake-192s", 3, 48, 16224, "SPHINCS+ round-3.1 parameter table"),
        make_sig("sphincs-shake-256f", 5, 64, 49856, "SPHINCS+ round-3.1 parameter table"),
        make_sig("sphincs-shake-256s", 5, 64, 29792, "SPHINCS+ round-3.1 parameter table"),
    };
    return catalog;
}

KemSpec hybrid(const KemSpec& a, const KemSpec& b) {
    KemSpec out;
    out.name = a.name + "+" + b.name;
    out.nist_level = std::max(a.nist_level, b.nist_level);
    out.pk_size = a.pk_size + b.pk_size;
    out.ct_size = a.ct_size + b.ct_size;
    out.t_keygen = a.t_keygen + b.t_keygen;
    out.t_encaps = a.t_encaps + b.t_encaps;
    out.t_decaps = a.t_decaps + b.t_decaps;
    out.provenance = "hybrid: component sums";
    return out;
}

KemSpec find_kem(const std::vector<KemSpec>& catalog, const std::string& name) {
    std::vector<std::string> parts = split(name, '+');
    std::optional<KemSpec> combined;
    for (const std::string& part : parts) {
        std::string want = normalize_name(part);
        const KemSpec* found = nullptr;
        for (const KemSpec& spec : catalog) {
            if (normalize_name(spec.name) == want) {
                found = &spec;
                break;
            }
        }
        if (!found) {
            throw UnknownAlgorithm("unknown KEM '" + part + "' (see the catalog command)");
        }
        combined = combined ? hybrid(*combined, *found) : *found;
    }
    if (!combined) {
        throw UnknownAlgorithm("empty KEM name");
    }
    return *combined;
}

SigSpec find_sig(const std::vector<SigSpec>& catalog, const std::string& name) {
    std::string want = normalize_name(name);
    for (const SigSpec& spec : catalog) {
        if (normalize_name(spec.name) == want) {
            return spec;
        }
    }
    throw UnknownAlgorithm("unknown signature algorithm '" + name +
                           "' (see the catalog command)");
}

Flights build_flights(const HandshakeProfile& profile) {
    Flights out;
    out.ch_bytes = profile.base_msg_sizes.client_hello_base + profile.kem.pk_size;
    out.sh_bytes = profile.base_msg_sizes.server_hello_base + profile.kem.ct_size;
    out.server_crypto_bytes = profile.base_msg_sizes.ee_cert_cv_fin_base +
                              profile.sig.cert_chain_size + profile.sig.sig_size;
    return out;
}

SimReport simulate(const HandshakeProfile& profile, std::vector<AmpEvent>* amp_trace) {
    const EndpointPolicy& cp = profile.client_policy;
    const EndpointPolicy& sp = profile.server_policy;
    const size_t mtu = cp.initial_mtu;
    const size_t header_len = kLongHeaderBytes + kCryptoFrameOverhead;

    Flights flights = build_flights(profile);
    std::vector<size_t> ch_sizes =
        packet::packetize(flights.ch_bytes, mtu, header_len, kHandshakePnLen);
    uint64_t n_ch = ch_sizes.size();
    // Initial datagrams are padded to the full MTU, so the server's budget
    // is based on whole UDP payloads regardless of ClientHello size.
    uint64_t received = n_ch * (mtu - packet::kIpUdpOverhead);

    uint64_t stream = flights.sh_bytes + flights.server_crypto_bytes;
    std::vector<size_t> srv_sizes =
        packet::packetize(stream, mtu, header_len, kHandshakePnLen);
    uint64_t n_srv = srv_sizes.size();

    SimReport rep;
    rep.server_flight_bytes = stream;
    rep.base_rtts = 1;

    double budget = sp.amp_factor * static_cast<double>(received);
    uint64_t srv_udp_total = stream + n_srv * kPerPacketOverhead;
    bool budget_binds = static_cast<double>(srv_udp_total) > budget;
    uint64_t client_initial_pkts = n_ch;
    bool deadlocked = false;

    if (budget_binds && sp.retry_enabled) {
        // Retry validates the address via the token in the resent
        // ClientHello; the flight then goes out without a budget.
        rep.retry_used = true;
        rep.base_rtts += 1;
        rep.packets_server += 1;
        client_initial_pkts += n_ch;
    } else if (budget_binds) {
        // Send the longest whole-packet prefix within the budget, then wait
        // for the client's first handshake-level ACK, which validates the
        // address and releases the rest of the flight.
        uint64_t sent = 0;
        uint64_t burst = 0;
        for (size_t sz : srv_sizes) {
            uint64_t udp = sz + kPerPacketOverhead;
            if (static_cast<double>(sent + udp) > budget) {
                break;
            }
            sent += udp;
            ++burst;
            if (amp_trace) {
                amp_trace->push_back({received, sent});
            }
        }
        if (burst == 0) {
            deadlocked = true;
        } else {
            rep.stall_rounds = 1;
        }
    } else if (amp_trace) {
        uint64_t sent = 0;
        for (size_t sz : srv_sizes) {
            sent += sz + kPerPacketOverhead;
            amp_trace->push_back({received, sent});
        }
    }

    rep.packets_server += n_srv;
    uint64_t every = std::max<uint64_t>(cp.ack_every, 1);
    uint64_t n_acks = std::max<uint64_t>(n_srv / every, rep.stall_rounds > 0 ? 1 : 0);
    rep.packets_client = client_initial_pkts + n_acks;

    if (deadlocked) {
        rep.outcome = Outcome::STALLED_AMPLIFICATION;
        rep.stall_rounds = 0;
    } else {
        // A space of n packets uses numbers 0..n-1; it overflows a window W
        // when n-1 >= W. Client initial and handshake spaces are separate.
        auto overflows = [](const std::optional<uint64_t>& window, uint64_t count) {
            return window && count > *window;
        };
        bool client_over = overflows(cp.pn_window, client_initial_pkts) ||
                           overflows(cp.pn_window, n_acks);
        bool server_over = overflows(sp.pn_window, n_srv);
        rep.outcome =
            (client_over || server_over) ? Outcome::FAILED_PN_WINDOW : Outcome::OK;
    }

    Duration compute = profile.kem.t_keygen + profile.kem.t_encaps + profile.kem.t_decaps +
                       profile.sig.t_sign + profile.sig.t_verify +
                       2.0 * profile.processing_delay;
    rep.ttfb = static_cast<double>(rep.base_rtts + rep.stall_rounds) * profile.rtt + compute;
    return rep;
}

TtfbParts ttfb_decompose(const SimReport& report, const HandshakeProfile& profile) {
    TtfbParts parts;
    parts.network = static_cast<double>(report.base_rtts) * profile.rtt;
    parts.stall = static_cast<double>(report.stall_rounds) * profile.rtt;
    parts.crypto_compute = report.ttfb - parts.network - parts.stall;
    return parts;
}

Catalog parse_catalog(std::istream& in) {
    Catalog catalog;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') {
            continue;
        }
        // The provenance field is free text and may itself contain ';', so
        // only the first five separators delimit fields.
        std::vector<std::string> fields;
        size_t start = 0;
        while (fields.size() < 5) {
            size_t pos = t.find(';', start);
            if (pos == std::string::npos) {
                break;
            }
            fields.push_back(trim(t.substr(start, pos - start)));
            start = pos + 1;
        }
        fields.push_back(trim(t.substr(start)));
        if (fields.size() != 6) {
            throw ParseError("catalog line " + std::to_string(lineno) +
                             ": expected 'name;level;pk;ct_or_sig;cert;provenance'");
        }
        uint64_t cert = parse_size(fields[4], lineno);
        if (cert == 0) {
            KemSpec spec;
            spec.name = fields[0];
            spec.nist_level = static_cast<int>(parse_size(fields[1], lineno));
            spec.pk_size = parse_size(fields[2], lineno);
            spec.ct_size = parse_size(fields[3], lineno);
            spec.provenance = fields[5];
            catalog.kems.push_back(std::move(spec));
        } else {
            SigSpec spec;
            spec.name = fields[0];
            spec.nist_level = static_cast<int>(parse_size(fields[1], lineno));
            spec.pk_size = parse_size(fields[2], lineno);
            spec.sig_size = parse_size(fields[3], lineno);
            spec.cert_chain_size = cert;
            spec.provenance = fields[5];
            if (spec.cert_chain_size < spec.pk_size + spec.sig_size) {
                throw ParseError("catalog line " + std::to_string(lineno) +
                                 ": cert_chain_size smaller than pk + sig");
            }
            catalog.sigs.push_back(std::move(spec));
        }
    }
    return catalog;
}

Catalog load_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open catalog file: " + path);
    }
    return parse_catalog(in);
}

void write_catalog(std::ostream& out, const Catalog& catalog) {
    out << "# qcl algorithm catalog: name;level;pk;ct_or_sig;cert;provenance\n";
    out << "# cert 0 marks a KEM row (ct column); otherwise a signature row (sig column),\n";
    out << "# with cert = pk + sig + 520 bytes of X.509 framing.\n";
    for (const KemSpec& kem : catalog.kems) {
        out << kem.name << ";" << kem.nist_level << ";" << kem.pk_size << ";" << kem.ct_size
            << ";0;" << kem.provenance << "\n";
    }
    for (const SigSpec& sig : catalog.sigs) {
        out << sig.name << ";" << sig.nist_level << ";" << sig.pk_size << ";" << sig.sig_size
            << ";" << sig.cert_chain_size << ";" << sig.provenance << "\n";
    }
}

}  // namespace qcl::sim
