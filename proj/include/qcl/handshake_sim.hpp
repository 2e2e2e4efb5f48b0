#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace qcl::sim {

using Duration = std::chrono::duration<double, std::milli>;

// Fixed model constants for handshake CRYPTO packets. A long-header packet
// spends 25 bytes on the header (flags, version, 8-byte cids, token length,
// length field) and 7 on the CRYPTO frame (type, offset, length varints),
// with a 2-byte packet number and the 16-byte AEAD tag.
constexpr size_t kLongHeaderBytes = 25;
constexpr size_t kCryptoFrameOverhead = 7;
constexpr size_t kHandshakePnLen = 2;
constexpr size_t kCertOverheadBytes = 520;

struct KemSpec {
    std::string name;
    int nist_level = 1;
    uint64_t pk_size = 0;
    uint64_t ct_size = 0;
    Duration t_keygen{0};
    Duration t_encaps{0};
    Duration t_decaps{0};
    std::string provenance;  // data-file annotation, not used by the model
};

struct SigSpec {
    std::string name;
    int nist_level = 0;  // 0 marks pre-quantum baselines
    uint64_t pk_size = 0;
    uint64_t sig_size = 0;
    uint64_t cert_chain_size = 0;
    Duration t_sign{0};
    Duration t_verify{0};
    std::string provenance;  // data-file annotation, not used by the model
};

struct EndpointPolicy {
    std::optional<uint64_t> pn_window;  // nullopt = unlimited
    double amp_factor = 3.0;
    bool retry_enabled = false;
    size_t initial_mtu = 1200;
    uint64_t ack_every = 2;
};

struct BaseMsgSizes {
    uint64_t client_hello_base = 300;
    uint64_t server_hello_base = 120;
    uint64_t ee_cert_cv_fin_base = 200;
};

struct HandshakeProfile {
    KemSpec kem;
    SigSpec sig;
    EndpointPolicy client_policy;
    EndpointPolicy server_policy;
    Duration rtt{10.0};
    BaseMsgSizes base_msg_sizes;
    Duration processing_delay{0};  // per-endpoint think time, applied twice
};

enum class Outcome { OK, FAILED_PN_WINDOW, STALLED_AMPLIFICATION };

std::string outcome_name(Outcome outcome);

struct SimReport {
    Duration ttfb{0};
    uint64_t packets_client = 0;
    uint64_t packets_server = 0;
    uint64_t server_flight_bytes = 0;
    bool retry_used = false;
    Outcome outcome = Outcome::OK;

    // Decomposition inputs, not part of the serialized report.
    uint64_t base_rtts = 0;
    uint64_t stall_rounds = 0;
};

struct Flights {
    uint64_t ch_bytes = 0;
    uint64_t sh_bytes = 0;
    uint64_t server_crypto_bytes = 0;
};

// One pre-validation server send: cumulative bytes the server had received
// from the client versus cumulative bytes it has sent including this packet.
struct AmpEvent {
    uint64_t client_bytes_received = 0;
    uint64_t server_bytes_sent = 0;
};

struct TtfbParts {
    Duration network{0};
    Duration crypto_compute{0};
    Duration stall{0};
};

// Built-in algorithm catalogs; sizes follow each algorithm's public
// parameter tables (see data/catalog.txt for per-row provenance).
const std::vector<KemSpec>& kem_catalog();
const std::vector<SigSpec>& sig_catalog();

// Concatenated hybrid: sizes and timings add, NIST level is the max.
KemSpec hybrid(const KemSpec& a, const KemSpec& b);

// Looks up `name` (case- and separator-insensitive); `a+b` resolves to a
// hybrid of the two components. Throws UnknownAlgorithm.
KemSpec find_kem(const std::vector<KemSpec>& catalog, const std::string& name);
SigSpec find_sig(const std::vector<SigSpec>& catalog, const std::string& name);

Flights build_flights(const HandshakeProfile& profile);

// Deterministic flight-by-flight handshake model. Failures are outcomes in
// the report, never exceptions. When `amp_trace` is non-null it receives one
// entry per server packet sent before address validation.
SimReport simulate(const HandshakeProfile& profile, std::vector<AmpEvent>* amp_trace = nullptr);

// Partitions report.ttfb into network (base round trips), crypto compute,
// and amplification stall; the parts sum to ttfb exactly.
TtfbParts ttfb_decompose(const SimReport& report, const HandshakeProfile& profile);

struct Catalog {
    std::vector<KemSpec> kems;
    std::vector<SigSpec> sigs;
};

// Catalog data file: one `name;level;pk;ct_or_sig;cert;provenance` row per
// line, '#' comments. cert 0 marks a KEM row, nonzero a signature row.
Catalog parse_catalog(std::istream& in);
Catalog load_catalog(const std::string& path);
void write_catalog(std::ostream& out, const Catalog& catalog);

}  // namespace qcl::sim
