// qcl: QUIC v1 protection pipeline bench and post-quantum handshake
// simulator. Subcommands: suites, vectors, bench, sweep, simulate, catalog.
// Exit codes: 0 success, 1 check failure, 2 usage or parse error.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "qcl/bench_harness.hpp"
#include "qcl/bytes.hpp"
#include "qcl/crypto_suites.hpp"
#include "qcl/errors.hpp"
#include "qcl/handshake_sim.hpp"
#include "qcl/key_schedule.hpp"
#include "qcl/vectors.hpp"

namespace {

using nlohmann::json;

uint64_t parse_byte_count(const std::string& text) {
    size_t pos = 0;
    uint64_t value = 0;
    try {
        value = std::stoull(text, &pos);
    } catch (const std::exception&) {
        throw qcl::ParseError("bad byte count: " + text);
    }
    std::string suffix = text.substr(pos);
    for (auto& c : suffix) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    if (suffix == "" || suffix == "b") {
        return value;
    }
    if (suffix == "k" || suffix == "kb" || suffix == "kib") {
        return value << 10;
    }
    if (suffix == "m" || suffix == "mb" || suffix == "mib") {
        return value << 20;
    }
    if (suffix == "g" || suffix == "gb" || suffix == "gib") {
        return value << 30;
    }
    throw qcl::ParseError("bad byte-count suffix: " + text);
}

std::optional<uint64_t> parse_window(const std::string& text) {
    if (text == "unlimited" || text == "inf" || text == "none") {
        return std::nullopt;
    }
    try {
        return std::stoull(text);
    } catch (const std::exception&) {
        throw qcl::ParseError("bad pn window: " + text + " (number or 'unlimited')");
    }
}

qcl::bench::Direction parse_direction(const std::string& text) {
    if (text == "seal") return qcl::bench::Direction::SEAL;
    if (text == "open") return qcl::bench::Direction::OPEN;
    if (text == "both") return qcl::bench::Direction::BOTH;
    throw qcl::ParseError("bad direction: " + text + " (seal, open, or both)");
}

qcl::sim::Catalog resolve_catalog() {
    if (const char* path = std::getenv("QCL_CATALOG")) {
        return qcl::sim::load_catalog(path);
    }
    return {qcl::sim::kem_catalog(), qcl::sim::sig_catalog()};
}

json bench_summary_json(const qcl::bench::BenchReport& r) {
    return json{
        {"suite", qcl::crypto::suite_params(r.cfg.suite).name},
        {"hp_alg", qcl::crypto::hp_name(r.cfg.hp_alg)},
        {"mtu", r.cfg.mtu},
        {"direction", r.cfg.direction == qcl::bench::Direction::SEAL   ? "seal"
                      : r.cfg.direction == qcl::bench::Direction::OPEN ? "open"
                                                                       : "both"},
        {"packets", r.packets},
        {"payload_bytes", r.payload_bytes},
        {"repetitions", r.reps.size()},
        {"goodput_Bps_median", r.goodput_Bps},
        {"goodput_Bps_mean", r.goodput_mean_Bps},
        {"framing_ns_median", r.framing_time.count()},
        {"pp_ns_median", r.pp_time.count()},
        {"hp_ns_median", r.hp_time.count()},
        {"pp_share", r.pp_share},
        {"hp_share", r.hp_share},
    };
}

void print_bench_text(const qcl::bench::BenchReport& r) {
    std::cout << qcl::crypto::suite_params(r.cfg.suite).name << " + "
              << qcl::crypto::hp_name(r.cfg.hp_alg) << " @ mtu " << r.cfg.mtu << ": "
              << r.packets << " packets, goodput " << std::fixed << std::setprecision(1)
              << r.goodput_Bps / 1e6 << " MB/s (median of " << r.reps.size() << "), pp "
              << std::setprecision(2) << 100 * r.pp_share << "%, hp " << 100 * r.hp_share
              << "%\n"
              << std::defaultfloat;
}

void write_csv_path(const std::string& path, std::span<const qcl::bench::BenchReport> reports) {
    if (path == "-") {
        qcl::bench::write_csv(std::cout, reports);
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw qcl::ParseError("cannot open CSV output file: " + path);
    }
    qcl::bench::write_csv(out, reports);
}

int cmd_suites(bool as_json) {
    auto suites = qcl::crypto::all_suites();
    const qcl::crypto::HpAlgId hp_algs[] = {
        qcl::crypto::HpAlgId::AES_ECB, qcl::crypto::HpAlgId::CHACHA20_RAW,
        qcl::crypto::HpAlgId::NOOP_HP, qcl::crypto::HpAlgId::OFF};
    if (as_json) {
        json doc{{"suites", json::array()}, {"hp_algs", json::array()}};
        for (const auto& s : suites) {
            doc["suites"].push_back({{"name", s.name},
                                     {"key_len", s.key_len},
                                     {"iv_len", s.iv_len},
                                     {"tag_len", s.tag_len}});
        }
        for (auto hp : hp_algs) {
            doc["hp_algs"].push_back({{"name", qcl::crypto::hp_name(hp)}});
        }
        std::cout << doc.dump(2) << "\n";
        return 0;
    }
    std::cout << "suite              key iv tag   hp key bytes per suite\n";
    for (const auto& s : suites) {
        std::cout << s.name;
        for (size_t i = std::string(s.name).size(); i < 19; ++i) {
            std::cout << ' ';
        }
        std::cout << s.key_len << "  " << s.iv_len << " " << s.tag_len << "   ";
        for (auto hp : hp_algs) {
            std::cout << qcl::crypto::hp_name(hp) << "=" << qcl::crypto::hp_key_len(s, hp)
                      << " ";
        }
        std::cout << "\n";
    }
    return 0;
}

int cmd_vectors_verify(const std::string& path) {
    std::vector<qcl::vectors::VectorRecord> records = qcl::vectors::load_vectors(path);
    if (records.empty()) {
        std::cerr << "warning: 0 vectors in " << path << "\n";
        return 0;
    }
    for (const auto& rec : records) {
        qcl::vectors::verify_record(rec);
        std::cout << rec.name << ": pass\n";
    }
    std::cout << records.size() << " vectors verified\n";
    return 0;
}

int cmd_vectors_keys(const std::string& dcid_hex, const std::string& secret_hex,
                     const std::string& suite_name, const std::string& hp_name,
                     const std::string& side_name) {
    qcl::crypto::SuiteId suite = qcl::crypto::suite_from_name(suite_name);
    qcl::crypto::HpAlgId hp = qcl::crypto::hp_from_name(hp_name);
    qcl::keys::TrafficSecret secret;
    if (!dcid_hex.empty()) {
        qcl::Bytes dcid = qcl::from_hex(dcid_hex);
        auto [client, server] = qcl::keys::derive_initial_secrets(dcid);
        std::cout << "client_initial_secret="
                  << qcl::to_hex(qcl::ByteSpan(client.secret.data(), client.secret.size()))
                  << "\n";
        std::cout << "server_initial_secret="
                  << qcl::to_hex(qcl::ByteSpan(server.secret.data(), server.secret.size()))
                  << "\n";
        secret = side_name == "server" ? server : client;
    } else if (!secret_hex.empty()) {
        qcl::Bytes raw = qcl::from_hex(secret_hex);
        if (raw.size() != qcl::keys::kSecretLen) {
            throw qcl::ParseError("secret must be 32 hex-encoded bytes");
        }
        std::copy(raw.begin(), raw.end(), secret.secret.begin());
        secret.side = side_name == "server" ? qcl::keys::Side::SERVER : qcl::keys::Side::CLIENT;
    } else {
        throw qcl::ParseError("vectors keys needs --dcid or --secret");
    }
    qcl::keys::PacketKeys keys =
        qcl::keys::derive_packet_keys(secret, qcl::crypto::suite_params(suite), hp);
    std::cout << "key=" << qcl::to_hex(keys.key) << "\n";
    std::cout << "iv=" << qcl::to_hex(qcl::ByteSpan(keys.iv.data(), keys.iv.size())) << "\n";
    std::cout << "hp=" << qcl::to_hex(keys.hp) << "\n";
    return 0;
}

int cmd_simulate(const qcl::sim::HandshakeProfile& profile) {
    qcl::sim::SimReport report = qcl::sim::simulate(profile);
    qcl::sim::TtfbParts parts = qcl::sim::ttfb_decompose(report, profile);
    json doc{
        {"kem", profile.kem.name},
        {"kem_nist_level", profile.kem.nist_level},
        {"kem_pk_size", profile.kem.pk_size},
        {"kem_ct_size", profile.kem.ct_size},
        {"sig", profile.sig.name},
        {"sig_pk_size", profile.sig.pk_size},
        {"sig_size", profile.sig.sig_size},
        {"cert_chain_size", profile.sig.cert_chain_size},
        {"ttfb", report.ttfb.count()},
        {"ttfb_network", parts.network.count()},
        {"ttfb_crypto_compute", parts.crypto_compute.count()},
        {"ttfb_stall", parts.stall.count()},
        {"packets_client", report.packets_client},
        {"packets_server", report.packets_server},
        {"server_flight_bytes", report.server_flight_bytes},
        {"retry_used", report.retry_used},
        {"outcome", qcl::sim::outcome_name(report.outcome)},
    };
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int cmd_catalog(bool as_json) {
    qcl::sim::Catalog catalog = resolve_catalog();
    if (!as_json) {
        qcl::sim::write_catalog(std::cout, catalog);
        return 0;
    }
    json doc{{"kems", json::array()}, {"sigs", json::array()}};
    for (const auto& k : catalog.kems) {
        doc["kems"].push_back({{"name", k.name},
                               {"nist_level", k.nist_level},
                               {"pk_size", k.pk_size},
                               {"ct_size", k.ct_size},
                               {"provenance", k.provenance}});
    }
    for (const auto& s : catalog.sigs) {
        doc["sigs"].push_back({{"name", s.name},
                               {"nist_level", s.nist_level},
                               {"pk_size", s.pk_size},
                               {"sig_size", s.sig_size},
                               {"cert_chain_size", s.cert_chain_size},
                               {"provenance", s.provenance}});
    }
    std::cout << doc.dump(2) << "\n";
    return 0;
}

int run(int argc, char** argv) {
    CLI::App app{"QUIC v1 packet-protection pipeline bench and handshake cost simulator"};
    app.require_subcommand(1);

    auto* suites_cmd = app.add_subcommand("suites", "List cipher suites and HP algorithms");
    bool suites_json = false;
    suites_cmd->add_flag("--json", suites_json, "machine-readable output");

    auto* vectors_cmd = app.add_subcommand("vectors", "Protection vector tools");
    vectors_cmd->require_subcommand(1);
    auto* verify_cmd = vectors_cmd->add_subcommand("verify", "Check a protection vector file");
    std::string vector_path;
    verify_cmd->add_option("file", vector_path, "vector file")->required();
    auto* keys_cmd = vectors_cmd->add_subcommand("keys", "Derive packet keys (name=hex lines)");
    std::string keys_dcid, keys_secret, keys_suite = "AES_128_GCM", keys_hp = "AES_ECB",
                            keys_side = "client";
    keys_cmd->add_option("--dcid", keys_dcid, "client destination connection id (hex)");
    keys_cmd->add_option("--secret", keys_secret, "32-byte traffic secret (hex)");
    keys_cmd->add_option("--suite", keys_suite, "cipher suite");
    keys_cmd->add_option("--hp", keys_hp, "header-protection algorithm");
    keys_cmd->add_option("--side", keys_side, "client or server")
        ->check(CLI::IsMember({"client", "server"}));

    qcl::bench::BenchConfig bench_cfg;
    bench_cfg.total_bytes = uint64_t{256} * 1024 * 1024;  // desk scale
    bench_cfg.repetitions = 5;
    std::string bench_suite = "AES_128_GCM", bench_hp = "AES_ECB", bench_bytes,
                bench_direction = "seal", bench_csv;
    bool bench_json = false;
    std::vector<size_t> sweep_mtus = {1500, 3000, 6000};

    auto add_bench_flags = [&](CLI::App* cmd) {
        cmd->add_option("--suite", bench_suite, "cipher suite");
        cmd->add_option("--hp", bench_hp, "header-protection algorithm");
        cmd->add_option("--bytes", bench_bytes, "stream volume (suffixes K/M/G, binary)");
        cmd->add_option("--reps", bench_cfg.repetitions, "repetitions");
        cmd->add_option("--pn-len", bench_cfg.pn_len, "packet number length (1-4)");
        cmd->add_option("--warmup", bench_cfg.warmup_packets, "warmup packets");
        cmd->add_option("--seed", bench_cfg.seed, "payload generator seed");
        cmd->add_option("--batch", bench_cfg.batch_packets, "packets per timing probe");
        cmd->add_option("--direction", bench_direction, "seal, open, or both");
        cmd->add_option("--csv", bench_csv, "write per-repetition rows to PATH ('-' stdout)");
        cmd->add_flag("--json", bench_json, "JSON summary");
    };
    auto* bench_cmd = app.add_subcommand("bench", "Protection pipeline throughput");
    add_bench_flags(bench_cmd);
    bench_cmd->add_option("--mtu", bench_cfg.mtu, "wire MTU including 28 IP+UDP bytes");
    auto* sweep_cmd = app.add_subcommand("sweep", "Throughput across MTUs");
    add_bench_flags(sweep_cmd);
    sweep_cmd->add_option("--mtus", sweep_mtus, "MTU list")->delimiter(',');

    auto* sim_cmd = app.add_subcommand("simulate", "Handshake cost model");
    std::string sim_kem = "x25519", sim_sig = "rsa2048", sim_window = "unlimited";
    double sim_rtt = 10.0, sim_amp = 3.0, sim_delay = 0.0;
    double t_keygen = 0, t_encaps = 0, t_decaps = 0, t_sign = 0, t_verify = 0;
    uint64_t sim_ack_every = 2;
    size_t sim_mtu = 1200;
    bool sim_retry = false;
    sim_cmd->add_option("--kem", sim_kem, "KEM name; 'a+b' builds a hybrid");
    sim_cmd->add_option("--sig", sim_sig, "signature algorithm name");
    sim_cmd->add_option("--rtt", sim_rtt, "round-trip time in ms");
    sim_cmd->add_option("--pn-window", sim_window, "packets per space, or 'unlimited'");
    sim_cmd->add_flag("--retry", sim_retry, "server sends Retry when the 3x budget binds");
    sim_cmd->add_option("--amp-factor", sim_amp, "anti-amplification factor");
    sim_cmd->add_option("--ack-every", sim_ack_every, "client ACK cadence in packets");
    sim_cmd->add_option("--mtu", sim_mtu, "initial MTU (>= 1200)");
    sim_cmd->add_option("--t-keygen", t_keygen, "KEM keygen time in ms");
    sim_cmd->add_option("--t-encaps", t_encaps, "KEM encapsulation time in ms");
    sim_cmd->add_option("--t-decaps", t_decaps, "KEM decapsulation time in ms");
    sim_cmd->add_option("--t-sign", t_sign, "signing time in ms");
    sim_cmd->add_option("--t-verify", t_verify, "verification time in ms");
    sim_cmd->add_option("--processing-delay", sim_delay, "per-endpoint think time in ms");

    auto* catalog_cmd = app.add_subcommand("catalog", "Print the algorithm catalog");
    bool catalog_json = false;
    catalog_cmd->add_flag("--json", catalog_json, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);  // prints help or the usage error
        return code == 0 ? 0 : 2;
    }

    if (suites_cmd->parsed()) {
        return cmd_suites(suites_json);
    }
    if (verify_cmd->parsed()) {
        return cmd_vectors_verify(vector_path);
    }
    if (keys_cmd->parsed()) {
        return cmd_vectors_keys(keys_dcid, keys_secret, keys_suite, keys_hp, keys_side);
    }
    if (bench_cmd->parsed() || sweep_cmd->parsed()) {
        bench_cfg.suite = qcl::crypto::suite_from_name(bench_suite);
        bench_cfg.hp_alg = qcl::crypto::hp_from_name(bench_hp);
        bench_cfg.direction = parse_direction(bench_direction);
        if (!bench_bytes.empty()) {
            bench_cfg.total_bytes = parse_byte_count(bench_bytes);
        }
        std::vector<qcl::bench::BenchReport> reports;
        if (bench_cmd->parsed()) {
            reports.push_back(qcl::bench::run_throughput(bench_cfg));
        } else {
            reports = qcl::bench::mtu_sweep(bench_cfg, sweep_mtus);
        }
        if (!bench_csv.empty()) {
            write_csv_path(bench_csv, reports);
        }
        if (bench_json) {
            json doc = json::array();
            for (const auto& r : reports) {
                doc.push_back(bench_summary_json(r));
            }
            std::cout << (reports.size() == 1 ? doc[0] : doc).dump(2) << "\n";
        } else if (bench_csv != "-") {
            for (const auto& r : reports) {
                print_bench_text(r);
            }
        }
        return 0;
    }
    if (sim_cmd->parsed()) {
        qcl::sim::Catalog catalog = resolve_catalog();
        qcl::sim::HandshakeProfile profile;
        profile.kem = qcl::sim::find_kem(catalog.kems, sim_kem);
        profile.sig = qcl::sim::find_sig(catalog.sigs, sim_sig);
        profile.kem.t_keygen = qcl::sim::Duration(t_keygen);
        profile.kem.t_encaps = qcl::sim::Duration(t_encaps);
        profile.kem.t_decaps = qcl::sim::Duration(t_decaps);
        profile.sig.t_sign = qcl::sim::Duration(t_sign);
        profile.sig.t_verify = qcl::sim::Duration(t_verify);
        profile.rtt = qcl::sim::Duration(sim_rtt);
        profile.processing_delay = qcl::sim::Duration(sim_delay);
        std::optional<uint64_t> window = parse_window(sim_window);
        for (auto* policy : {&profile.client_policy, &profile.server_policy}) {
            policy->pn_window = window;
            policy->amp_factor = sim_amp;
            policy->initial_mtu = sim_mtu;
            policy->ack_every = sim_ack_every;
        }
        profile.server_policy.retry_enabled = sim_retry;
        return cmd_simulate(profile);
    }
    if (catalog_cmd->parsed()) {
        return cmd_catalog(catalog_json);
    }
    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const qcl::VectorMismatch& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const qcl::AuthFailure& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const qcl::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
