#include "qcl/bench_harness.hpp"

#include <algorithm>
#include <cstring>
#include <iomanip>
#include <ostream>
#include <random>

#include "qcl/errors.hpp"
#include "qcl/key_schedule.hpp"
#include "qcl/packet_protection.hpp"

namespace qcl::bench {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> values) {
    if (values.empty()) {
        return 0;
    }
    std::sort(values.begin(), values.end());
    size_t mid = values.size() / 2;
    if (values.size() % 2 == 1) {
        return values[mid];
    }
    return (values[mid - 1] + values[mid]) / 2.0;
}

keys::PacketKeys bench_keys(const BenchConfig& cfg) {
    keys::TrafficSecret ts;
    std::mt19937_64 rng(cfg.seed);
    for (auto& b : ts.secret) {
        b = static_cast<uint8_t>(rng());
    }
    ts.side = keys::Side::CLIENT;
    ts.level = keys::Level::APPLICATION;
    return keys::derive_packet_keys(ts, crypto::suite_params(cfg.suite), cfg.hp_alg);
}

// Single-allocation batch state: each packet occupies a fixed-stride slot so
// the staged loops touch memory linearly.
class Runner {
  public:
    explicit Runner(const BenchConfig& cfg)
        : cfg_(cfg),
          keys_(bench_keys(cfg)),
          aead_(cfg.suite, keys_.key),
          header_(packet::make_short_header(make_dcid(cfg), cfg.pn_len)),
          capacity_(packet::packet_capacity(cfg.mtu, header_.size(), cfg.pn_len)),
          sizes_(packet::packetize(cfg.total_bytes, cfg.mtu, header_.size(), cfg.pn_len)) {
        if (cfg.hp_alg != crypto::HpAlgId::OFF) {
            masker_.emplace(cfg.hp_alg, keys_.hp);
        }
        pn_offset_ = header_.size();
        // The HP sample sits at pn_offset + 4; the smallest sealed payload
        // must keep it inside the ciphertext. Short final packets are padded
        // up to this floor for sealing but accounted at their real size.
        min_payload_ = cfg.pn_len >= 4 ? 0 : 4 - cfg.pn_len;
        slot_payload_ = std::max(capacity_, min_payload_);
        stride_ = pn_offset_ + cfg.pn_len + slot_payload_ + crypto::kTagLen;

        size_t batch = std::max<size_t>(cfg.batch_packets, 1);
        arena_.resize(batch * stride_);
        samples_.resize(batch * crypto::kSampleLen);
        masks_.resize(batch * crypto::kMaskLen);
        scratch_.resize(slot_payload_);
        payload_.resize(slot_payload_);
        std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15u);
        for (auto& b : payload_) {
            b = static_cast<uint8_t>(rng());
        }
    }

    uint64_t packets() const { return sizes_.size(); }
    uint64_t payload_bytes() const { return cfg_.total_bytes; }

    RepStats run_rep() {
        RepStats stats;
        size_t batch = std::max<size_t>(cfg_.batch_packets, 1);
        uint64_t pn = 0;
        size_t next = 0;
        while (next < sizes_.size()) {
            size_t n = std::min(batch, sizes_.size() - next);
            if (cfg_.direction != Direction::OPEN) {
                run_seal_batch(next, n, pn, stats, true);
            } else {
                run_seal_batch(next, n, pn, stats, false);
            }
            if (cfg_.direction != Direction::SEAL) {
                run_open_batch(next, n, pn, stats);
            }
            next += n;
            pn += n;
        }
        stats.seconds =
            static_cast<double>(stats.framing_ns + stats.pp_ns + stats.hp_ns) / 1e9;
        stats.goodput_Bps = static_cast<double>(cfg_.total_bytes) / stats.seconds;
        return stats;
    }

    void warmup() {
        if (cfg_.warmup_packets == 0 || sizes_.empty()) {
            return;
        }
        RepStats sink;
        size_t batch = std::max<size_t>(cfg_.batch_packets, 1);
        uint64_t done = 0;
        while (done < cfg_.warmup_packets) {
            size_t n = std::min<uint64_t>(batch, cfg_.warmup_packets - done);
            run_seal_batch(0, std::min<size_t>(n, sizes_.size()), 0, sink, true);
            done += n;
        }
    }

  private:
    static Bytes make_dcid(const BenchConfig& cfg) {
        Bytes dcid(cfg.dcid_len);
        for (size_t i = 0; i < dcid.size(); ++i) {
            dcid[i] = static_cast<uint8_t>(0xd0 + i);
        }
        return dcid;
    }

    size_t sealed_size(size_t payload_len) const {
        return std::max(payload_len, min_payload_);
    }

    // Stages: framing (header + pn bytes), PP (AEAD seal), HP (gather
    // samples, one batched mask computation, apply).
    void run_seal_batch(size_t first, size_t n, uint64_t pn_base, RepStats& stats, bool timed) {
        Clock::time_point t0 = Clock::now();
        for (size_t i = 0; i < n; ++i) {
            uint8_t* slot = arena_.data() + i * stride_;
            std::memcpy(slot, header_.data(), header_.size());
            packet::encode_pn(pn_base + i, cfg_.pn_len, slot + pn_offset_);
        }
        Clock::time_point t1 = Clock::now();
        for (size_t i = 0; i < n; ++i) {
            uint8_t* slot = arena_.data() + i * stride_;
            size_t len = sealed_size(sizes_[first + i]);
            auto nonce = packet::compute_nonce(keys_.iv, pn_base + i);
            aead_.seal_into(std::span<uint8_t>(slot + pn_offset_ + cfg_.pn_len,
                                               len + crypto::kTagLen),
                            nonce, ByteSpan(slot, pn_offset_ + cfg_.pn_len),
                            ByteSpan(payload_.data(), len));
        }
        Clock::time_point t2 = Clock::now();
        uint64_t hp_ns = 0;
        if (masker_) {
            mask_batch(n);
            hp_ns = std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t2)
                        .count();
        }
        if (timed) {
            stats.framing_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0).count();
            stats.pp_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(t2 - t1).count();
            stats.hp_ns += hp_ns;
        }
    }

    // XOR-symmetric: the same pass applies and removes header protection.
    void mask_batch(size_t n) {
        for (size_t i = 0; i < n; ++i) {
            const uint8_t* slot = arena_.data() + i * stride_;
            std::memcpy(samples_.data() + i * crypto::kSampleLen, slot + pn_offset_ + 4,
                        crypto::kSampleLen);
        }
        masker_->mask_many(ByteSpan(samples_.data(), n * crypto::kSampleLen),
                           std::span<uint8_t>(masks_.data(), n * crypto::kMaskLen));
        for (size_t i = 0; i < n; ++i) {
            uint8_t* slot = arena_.data() + i * stride_;
            const uint8_t* mask = masks_.data() + i * crypto::kMaskLen;
            slot[0] ^= mask[0] & 0x1f;
            for (size_t k = 0; k < cfg_.pn_len; ++k) {
                slot[pn_offset_ + k] ^= mask[1 + k];
            }
        }
    }

    // Reverse stages over slots sealed by run_seal_batch for the same pns.
    void run_open_batch(size_t first, size_t n, uint64_t pn_base, RepStats& stats) {
        Clock::time_point t0 = Clock::now();
        if (masker_) {
            mask_batch(n);
            stats.hp_ns +=
                std::chrono::duration_cast<std::chrono::nanoseconds>(Clock::now() - t0)
                    .count();
        }
        Clock::time_point t1 = Clock::now();
        uint64_t decoded_sink = 0;
        for (size_t i = 0; i < n; ++i) {
            const uint8_t* slot = arena_.data() + i * stride_;
            uint64_t truncated = 0;
            for (size_t k = 0; k < cfg_.pn_len; ++k) {
                truncated = (truncated << 8) | slot[pn_offset_ + k];
            }
            decoded_sink ^= packet::pn_decode(truncated, cfg_.pn_len,
                                              static_cast<int64_t>(pn_base + i) - 1);
        }
        Clock::time_point t2 = Clock::now();
        for (size_t i = 0; i < n; ++i) {
            const uint8_t* slot = arena_.data() + i * stride_;
            size_t len = sealed_size(sizes_[first + i]);
            auto nonce = packet::compute_nonce(keys_.iv, pn_base + i);
            aead_.open_into(scratch_, nonce, ByteSpan(slot, pn_offset_ + cfg_.pn_len),
                            ByteSpan(slot + pn_offset_ + cfg_.pn_len, len + crypto::kTagLen));
        }
        Clock::time_point t3 = Clock::now();
        sink_ ^= decoded_sink;
        stats.framing_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(t2 - t1).count();
        stats.pp_ns += std::chrono::duration_cast<std::chrono::nanoseconds>(t3 - t2).count();
    }

    BenchConfig cfg_;
    keys::PacketKeys keys_;
    crypto::AeadCipher aead_;
    std::optional<crypto::HpMasker> masker_;
    Bytes header_;
    size_t capacity_ = 0;
    std::vector<size_t> sizes_;
    size_t pn_offset_ = 0;
    size_t min_payload_ = 0;
    size_t slot_payload_ = 0;
    size_t stride_ = 0;
    Bytes arena_;
    Bytes samples_;
    Bytes masks_;
    Bytes scratch_;
    Bytes payload_;
    volatile uint64_t sink_ = 0;  // keeps pn decoding from being optimized out
};

}  // namespace

BenchReport run_throughput(const BenchConfig& cfg) {
    if (cfg.repetitions < 1) {
        throw ParseError("repetitions must be >= 1");
    }
    Runner runner(cfg);
    runner.warmup();

    BenchReport report;
    report.cfg = cfg;
    report.packets = runner.packets();
    report.payload_bytes = runner.payload_bytes();
    report.reps.reserve(cfg.repetitions);
    for (uint32_t rep = 0; rep < cfg.repetitions; ++rep) {
        report.reps.push_back(runner.run_rep());
    }

    std::vector<double> goodputs, framing, pp, hp;
    for (const RepStats& r : report.reps) {
        goodputs.push_back(r.goodput_Bps);
        framing.push_back(static_cast<double>(r.framing_ns));
        pp.push_back(static_cast<double>(r.pp_ns));
        hp.push_back(static_cast<double>(r.hp_ns));
    }
    report.goodput_Bps = median(goodputs);
    double sum = 0;
    for (double g : goodputs) {
        sum += g;
    }
    report.goodput_mean_Bps = sum / goodputs.size();
    report.framing_time = Duration(median(framing));
    report.pp_time = Duration(median(pp));
    report.hp_time = Duration(median(hp));
    CostShares shares = attribute_cost(report);
    report.pp_share = shares.pp_share;
    report.hp_share = shares.hp_share;
    return report;
}

CostShares attribute_cost(const BenchReport& report) {
    std::vector<double> pp_shares, hp_shares;
    for (const RepStats& r : report.reps) {
        double total = static_cast<double>(r.framing_ns + r.pp_ns + r.hp_ns);
        if (total <= 0) {
            continue;
        }
        pp_shares.push_back(static_cast<double>(r.pp_ns) / total);
        hp_shares.push_back(static_cast<double>(r.hp_ns) / total);
    }
    return {median(pp_shares), median(hp_shares)};
}

std::vector<BenchReport> mtu_sweep(const BenchConfig& cfg, const std::vector<size_t>& mtus) {
    std::vector<BenchReport> reports;
    reports.reserve(mtus.size());
    for (size_t mtu : mtus) {
        BenchConfig sub = cfg;
        sub.mtu = mtu;
        reports.push_back(run_throughput(sub));
    }
    return reports;
}

void write_csv(std::ostream& out, std::span<const BenchReport> reports) {
    out << "suite,hp_alg,mtu,rep,goodput_Bps,pp_ns,hp_ns,packets\n";
    for (const BenchReport& report : reports) {
        const auto& suite = crypto::suite_params(report.cfg.suite);
        for (size_t rep = 0; rep < report.reps.size(); ++rep) {
            const RepStats& r = report.reps[rep];
            out << suite.name << ',' << crypto::hp_name(report.cfg.hp_alg) << ','
                << report.cfg.mtu << ',' << rep << ',' << std::fixed << std::setprecision(1)
                << r.goodput_Bps << std::defaultfloat << ',' << r.pp_ns << ',' << r.hp_ns << ','
                << report.packets << "\n";
        }
    }
}

}  // namespace qcl::bench
