#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "qcl/bench_harness.hpp"
#include "qcl/errors.hpp"
#include "qcl/packet_protection.hpp"

using namespace qcl;
using namespace qcl::bench;

namespace {

BenchConfig small_config() {
    BenchConfig cfg;
    cfg.total_bytes = 4 * 1024 * 1024;
    cfg.repetitions = 3;
    cfg.warmup_packets = 64;
    return cfg;
}

size_t count_lines(const std::string& s) {
    size_t n = 0;
    for (char c : s) {
        if (c == '\n') {
            ++n;
        }
    }
    return n;
}

}  // namespace

TEST_CASE("run_throughput reports the exact packetize decomposition") {
    BenchConfig cfg = small_config();
    BenchReport rep = run_throughput(cfg);

    size_t header_len = 1 + cfg.dcid_len;
    auto sizes = packet::packetize(cfg.total_bytes, cfg.mtu, header_len, cfg.pn_len);
    CHECK(rep.packets == sizes.size());
    CHECK(rep.payload_bytes == cfg.total_bytes);
    CHECK(rep.reps.size() == cfg.repetitions);
    CHECK(rep.goodput_Bps > 0);
    CHECK(rep.goodput_mean_Bps > 0);
    for (const auto& r : rep.reps) {
        CHECK(r.seconds > 0);
        CHECK(r.goodput_Bps > 0);
        CHECK(r.pp_ns > 0);
    }
}

TEST_CASE("repeated runs with one seed are structurally identical") {
    BenchConfig cfg = small_config();
    BenchReport a = run_throughput(cfg);
    BenchReport b = run_throughput(cfg);
    CHECK(a.packets == b.packets);
    CHECK(a.payload_bytes == b.payload_bytes);
}

TEST_CASE("a single-packet stream still produces a report") {
    BenchConfig cfg = small_config();
    cfg.total_bytes = 100;
    cfg.warmup_packets = 4;
    BenchReport rep = run_throughput(cfg);
    CHECK(rep.packets == 1);
    CHECK(rep.payload_bytes == 100);
    CHECK(rep.goodput_Bps > 0);
}

TEST_CASE("disabling header protection zeroes the hp stage exactly") {
    BenchConfig cfg = small_config();
    cfg.hp_alg = crypto::HpAlgId::OFF;
    BenchReport rep = run_throughput(cfg);
    CHECK(rep.hp_time.count() == 0.0);
    CHECK(rep.hp_share == 0.0);
    for (const auto& r : rep.reps) {
        CHECK(r.hp_ns == 0);
    }
}

TEST_CASE("stage shares are fractions of the staged total") {
    BenchReport rep = run_throughput(small_config());
    CostShares shares = attribute_cost(rep);
    CHECK(shares.pp_share == rep.pp_share);
    CHECK(shares.hp_share == rep.hp_share);
    CHECK(rep.pp_share > 0.0);
    CHECK(rep.pp_share < 1.0);
    CHECK(rep.hp_share >= 0.0);
    CHECK(rep.pp_share + rep.hp_share <= 1.0);
}

TEST_CASE("the open and both directions run the reverse pipeline") {
    for (Direction d : {Direction::OPEN, Direction::BOTH}) {
        BenchConfig cfg = small_config();
        cfg.total_bytes = 1024 * 1024;
        cfg.direction = d;
        BenchReport rep = run_throughput(cfg);
        CHECK(rep.goodput_Bps > 0);
        CHECK(rep.reps.size() == cfg.repetitions);
    }
}

TEST_CASE("every suite and hp pairing survives a small bench run") {
    for (auto suite : {crypto::SuiteId::AES_256_GCM, crypto::SuiteId::CHACHA20_POLY1305,
                       crypto::SuiteId::NOOP}) {
        for (auto hp : {crypto::HpAlgId::CHACHA20_RAW, crypto::HpAlgId::NOOP_HP}) {
            BenchConfig cfg = small_config();
            cfg.total_bytes = 256 * 1024;
            cfg.suite = suite;
            cfg.hp_alg = hp;
            cfg.repetitions = 1;
            CHECK(run_throughput(cfg).goodput_Bps > 0);
        }
    }
}

TEST_CASE("run_throughput validates its configuration") {
    BenchConfig cfg = small_config();
    cfg.mtu = 40;
    CHECK_THROWS_AS(run_throughput(cfg), MtuTooSmall);

    cfg = small_config();
    cfg.repetitions = 0;
    CHECK_THROWS_AS(run_throughput(cfg), ParseError);
}

TEST_CASE("mtu_sweep produces one report per mtu over the same volume") {
    BenchConfig cfg = small_config();
    cfg.repetitions = 1;
    auto reports = mtu_sweep(cfg, {1500, 3000});
    REQUIRE(reports.size() == 2);
    CHECK(reports[0].cfg.mtu == 1500);
    CHECK(reports[1].cfg.mtu == 3000);
    CHECK(reports[0].payload_bytes == reports[1].payload_bytes);
    CHECK(reports[0].packets > reports[1].packets);
}

TEST_CASE("csv output carries the documented columns, one row per repetition") {
    BenchConfig cfg = small_config();
    cfg.total_bytes = 1024 * 1024;
    cfg.repetitions = 2;
    std::vector<BenchReport> reports = {run_throughput(cfg)};

    std::ostringstream out;
    write_csv(out, reports);
    std::string csv = out.str();

    REQUIRE(csv.rfind("suite,hp_alg,mtu,rep,goodput_Bps,pp_ns,hp_ns,packets\n", 0) == 0);
    CHECK(count_lines(csv) == 1 + cfg.repetitions);

    std::istringstream lines(csv);
    std::string line;
    std::getline(lines, line);
    std::getline(lines, line);
    CHECK(line.rfind("AES_128_GCM,AES_ECB,1500,0,", 0) == 0);
    CHECK(std::count(line.begin(), line.end(), ',') == 7);
}
