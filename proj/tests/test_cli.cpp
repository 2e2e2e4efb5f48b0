#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

using json = nlohmann::json;

namespace {

const std::string kBin = QCL_BIN_PATH;
const std::string kDataDir = QCL_TEST_DATA_DIR;

struct RunResult {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Runs the CLI through the shell so tests can prepend environment overrides.
RunResult run(const std::string& args, const std::string& env = "") {
    std::string out_path = "/tmp/qcl_test_stdout";
    std::string err_path = "/tmp/qcl_test_stderr";
    std::string cmd =
        env + (env.empty() ? "" : " ") + kBin + " " + args + " >" + out_path + " 2>" + err_path;
    int status = std::system(cmd.c_str());
    RunResult r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_path);
    r.err = slurp(err_path);
    return r;
}

}  // namespace

TEST_CASE("suites lists every suite and masking algorithm") {
    RunResult r = run("suites");
    REQUIRE(r.code == 0);
    for (const char* name :
         {"AES_128_GCM", "AES_256_GCM", "CHACHA20_POLY1305", "NOOP", "AES_ECB", "OFF"}) {
        CAPTURE(name);
        CHECK(r.out.find(name) != std::string::npos);
    }

    RunResult j = run("suites --json");
    REQUIRE(j.code == 0);
    json doc = json::parse(j.out);
    REQUIRE(doc["suites"].size() == 4);
    REQUIRE(doc["hp_algs"].size() == 4);
    CHECK(doc["suites"][0]["key_len"] == 16);
    CHECK(doc["suites"][0]["iv_len"] == 12);
    CHECK(doc["suites"][0]["tag_len"] == 16);
}

TEST_CASE("usage errors exit with status 2") {
    CHECK(run("--bogus-flag").code == 2);
    CHECK(run("").code == 2);
    CHECK(run("bench --suite AES_127_GCM --bytes 1k --reps 1").code == 2);
    CHECK(run("simulate --kem ntru-hps").code == 2);
    CHECK(run("vectors verify /nonexistent.vec").code == 2);
}

TEST_CASE("vectors verify reports each record and the total") {
    RunResult r = run("vectors verify " + kDataDir + "/protection.vec");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("initial-aes128-ecb: pass") != std::string::npos);
    CHECK(r.out.find("3 vectors verified") != std::string::npos);
}

TEST_CASE("vectors verify fails with status 1 on a corrupted wire") {
    std::string original = slurp(kDataDir + "/protection.vec");
    REQUIRE_FALSE(original.empty());
    size_t wire_pos = original.find("wire:");
    REQUIRE(wire_pos != std::string::npos);
    // Corrupt one hex digit inside the first expected wire image.
    size_t digit = wire_pos + 20;
    original[digit] = original[digit] == '0' ? '1' : '0';

    std::string tmp = "/tmp/qcl_test_corrupt.vec";
    std::ofstream(tmp) << original;
    RunResult r = run("vectors verify " + tmp);
    CHECK(r.code == 1);
    CHECK(r.err.find("initial-aes128-ecb") != std::string::npos);

    std::ofstream(tmp) << "# no records\n";
    RunResult empty = run("vectors verify " + tmp);
    CHECK(empty.code == 0);
    CHECK(empty.err.find("0 vectors") != std::string::npos);
}

TEST_CASE("vectors keys prints the initial secrets for a connection id") {
    RunResult r = run("vectors keys --dcid 8394c8f03e515708");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("c00cf151ca5be075ed0ebfb5c80323c42d6b7db67881289af4008f1f6c357aea") !=
          std::string::npos);
    CHECK(r.out.find("key=1f369613dd76d5467730efcbe3b1a22d") != std::string::npos);
    CHECK(r.out.find("hp=9f50449e04a0e810283a1e9933adedd2") != std::string::npos);
}

TEST_CASE("bench emits json and csv for a small run") {
    RunResult r = run("bench --bytes 1m --reps 2 --warmup 16 --json");
    REQUIRE(r.code == 0);
    json doc = json::parse(r.out);
    CHECK(doc["suite"] == "AES_128_GCM");
    CHECK(doc["hp_alg"] == "AES_ECB");
    CHECK(doc["mtu"] == 1500);
    CHECK(doc["repetitions"] == 2);
    CHECK(doc["goodput_Bps_median"].get<double>() > 0);
    CHECK(doc["pp_share"].get<double>() > 0);

    std::string csv_path = "/tmp/qcl_test_bench.csv";
    RunResult c = run("bench --bytes 1m --reps 2 --warmup 16 --csv " + csv_path);
    REQUIRE(c.code == 0);
    std::string csv = slurp(csv_path);
    CHECK(csv.rfind("suite,hp_alg,mtu,rep,", 0) == 0);
}

TEST_CASE("sweep produces one entry per mtu") {
    RunResult r = run("sweep --bytes 1m --reps 1 --warmup 16 --mtus 1500,3000 --json");
    REQUIRE(r.code == 0);
    json doc = json::parse(r.out);
    REQUIRE(doc.is_array());
    REQUIRE(doc.size() == 2);
    CHECK(doc[0]["mtu"] == 1500);
    CHECK(doc[1]["mtu"] == 3000);
}

TEST_CASE("simulate reports the handshake profile and outcome") {
    RunResult r = run("simulate --kem p256+kyber512 --sig rsa2048 --rtt 12.5");
    REQUIRE(r.code == 0);
    json doc = json::parse(r.out);
    CHECK(doc["kem"] == "p256+kyber512");
    CHECK(doc["kem_pk_size"] == 865);
    CHECK(doc["kem_ct_size"] == 833);
    CHECK(doc["kem_nist_level"] == 1);
    CHECK(doc["outcome"] == "ok");
    CHECK(doc["retry_used"] == false);
    CHECK(doc["ttfb"].get<double>() == 12.5);
    CHECK(doc["ttfb_network"].get<double>() == 12.5);
    CHECK(doc["ttfb_stall"].get<double>() == 0.0);
}

TEST_CASE("simulate surfaces failed outcomes with exit status 0") {
    RunResult r = run("simulate --kem x25519 --sig sphincs-sha2-192f --pn-window 64");
    REQUIRE(r.code == 0);
    json doc = json::parse(r.out);
    CHECK(doc["outcome"] == "failed_pn_window");
    CHECK(doc["packets_server"] == 65);

    RunResult retry = run("simulate --kem x25519 --sig sphincs-sha2-192f --retry");
    json rdoc = json::parse(retry.out);
    CHECK(rdoc["retry_used"] == true);
    CHECK(rdoc["ttfb_stall"].get<double>() == 0.0);

    RunResult unlimited =
        run("simulate --kem x25519 --sig sphincs-sha2-192f --pn-window unlimited");
    CHECK(json::parse(unlimited.out)["outcome"] == "ok");
}

TEST_CASE("the catalog command round-trips through QCL_CATALOG") {
    RunResult base = run("catalog --json");
    REQUIRE(base.code == 0);
    json doc = json::parse(base.out);
    REQUIRE(doc["kems"].size() == 13);
    REQUIRE(doc["sigs"].size() == 20);

    RunResult text = run("catalog");
    REQUIRE(text.code == 0);
    std::string path = "/tmp/qcl_test_catalog.txt";
    std::string modified = text.out;
    size_t pos = modified.find("kyber512;1;800");
    REQUIRE(pos != std::string::npos);
    modified.replace(pos, 14, "kyber512;1;801");
    std::ofstream(path) << modified;

    RunResult overridden = run("simulate --kem kyber512 --sig rsa2048", "QCL_CATALOG=" + path);
    REQUIRE(overridden.code == 0);
    CHECK(json::parse(overridden.out)["kem_pk_size"] == 801);

    RunResult missing = run("catalog", "QCL_CATALOG=/nonexistent/catalog.txt");
    CHECK(missing.code == 2);
}
