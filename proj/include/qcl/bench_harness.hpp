#pragma once

#include <chrono>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qcl/crypto_suites.hpp"

namespace qcl::bench {

using Duration = std::chrono::duration<double, std::nano>;

enum class Direction { SEAL, OPEN, BOTH };

struct BenchConfig {
    crypto::SuiteId suite = crypto::SuiteId::AES_128_GCM;
    crypto::HpAlgId hp_alg = crypto::HpAlgId::AES_ECB;
    size_t mtu = 1500;
    uint64_t total_bytes = uint64_t{8} * 1024 * 1024 * 1024;
    size_t pn_len = 2;
    uint64_t warmup_packets = 2048;
    uint32_t repetitions = 25;
    Direction direction = Direction::SEAL;
    uint64_t seed = 0x71c1b857a5u;
    size_t dcid_len = 8;
    size_t batch_packets = 1024;  // packets per timing probe
};

struct RepStats {
    double seconds = 0;  // wall time of the repetition
    uint64_t framing_ns = 0;
    uint64_t pp_ns = 0;
    uint64_t hp_ns = 0;
    double goodput_Bps = 0;
};

struct BenchReport {
    BenchConfig cfg;
    uint64_t packets = 0;        // per repetition, from packetize
    uint64_t payload_bytes = 0;  // per repetition, equals the packetize total
    double goodput_Bps = 0;      // median over repetitions
    double goodput_mean_Bps = 0;
    Duration framing_time{0};  // medians over repetitions
    Duration pp_time{0};
    Duration hp_time{0};
    double pp_share = 0;  // of framing + pp + hp stage time
    double hp_share = 0;
    std::vector<RepStats> reps;
};

struct CostShares {
    double pp_share = 0;
    double hp_share = 0;
};

// Streams cfg.total_bytes of seeded pseudo-random payload through the
// protection pipeline in batches, timing the framing, packet-protection, and
// header-protection stages separately. Throws MtuTooSmall.
BenchReport run_throughput(const BenchConfig& cfg);

// Median per-stage shares of total staged pipeline time.
CostShares attribute_cost(const BenchReport& report);

// One report per MTU over the same stream volume.
std::vector<BenchReport> mtu_sweep(const BenchConfig& cfg, const std::vector<size_t>& mtus);

// One row per repetition: suite,hp_alg,mtu,rep,goodput_Bps,pp_ns,hp_ns,packets
void write_csv(std::ostream& out, std::span<const BenchReport> reports);

}  // namespace qcl::bench
