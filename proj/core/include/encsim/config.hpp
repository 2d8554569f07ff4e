#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>

#include "encsim/types.hpp"

namespace encsim {

struct TlbLevelConfig {
    std::uint32_t sets = 0;
    std::uint32_t ways = 0;
    std::uint32_t entries() const { return sets * ways; }
};

enum class Replacement : std::uint8_t { Lru, Random };

struct TlbConfig {
    // Testbed defaults: iTLB 64 entries (8x8), dTLB 64 (16x4), L2 TLB 1536 (128x12).
    TlbLevelConfig itlb{8, 8};
    TlbLevelConfig dtlb{16, 4};
    TlbLevelConfig l2{128, 12};
    // dTLB and L2 TLB observed fully shared across logical cores of one
    // physical core; set false to model static partitioning instead.
    bool shared_across_logical_cores = true;
    // false: AEX flushes every TLB entry (legacy manuals); true: only the
    // entries of the current PCID survive selection (newer manuals).
    bool pcid_selective_flush = false;
    Replacement replacement = Replacement::Lru;
};

struct CacheLevelConfig {
    std::uint32_t sets = 0;
    std::uint32_t ways = 0;
    Cycle latency = 0;
};

enum class SliceHash : std::uint8_t { Single, XorFold };

struct CacheConfig {
    // Testbed: L1 32KB 64x8 (split i/d), L2 256KB 1024x4, L3 8MB 8192x16.
    CacheLevelConfig l1{64, 8, 4};
    CacheLevelConfig l2{1024, 4, 12};
    CacheLevelConfig l3{8192, 16, 40};
    std::uint32_t line_size = 64;
    std::uint32_t llc_slices = 1;
    SliceHash slice_hash = SliceHash::Single;
    bool inclusive_llc = true;
    bool next_line_prefetcher = false;
};

struct DramConfig {
    // Testbed: 2 channels x 1 DIMM x 2 ranks x 16 banks x 2^15 rows, 8KB rows.
    std::uint32_t channels = 2;
    std::uint32_t dimms = 1;
    std::uint32_t ranks = 2;
    std::uint32_t banks = 16;
    std::uint64_t rows = 1ull << 15;
    std::uint32_t row_bytes = 8192;
    // Address mapping. Row bits start at `row_shift` (row = pa >> 19 by
    // default). Bank index is taken from `bank_lo` upward; placing it below
    // the page shift makes a 4KB page span 4 (bank,row) cells of 1KB each,
    // which is what the DRAMA granularity analysis relies on. Channel and
    // rank are single configurable bits. `bank_xor_row` folds the row's low
    // bits into the bank index, so cache-set-congruent addresses scatter
    // across banks the way reverse-engineered mappings do.
    unsigned row_shift = 19;
    unsigned bank_lo = 10;
    unsigned channel_bit = 6;
    unsigned rank_bit = 18;
    bool bank_xor_row = true;
    Cycle latency_hit = 160;
    Cycle latency_conflict = 300;
};

struct MemCostConfig {
    Cycle page_walk_latency = 100;
    // The paper states only the ordering "shootdowns are cheaper than
    // faults"; absolute values are free parameters.
    Cycle page_fault_aex_cost = 15000;
    Cycle shootdown_aex_cost = 8000;
    Cycle other_aex_cost = 8000;
    // Optional background interrupt source (0 = disabled): fires aex(other)
    // with this period, modeling legitimate system interrupts.
    Cycle background_interrupt_period = 0;
};

struct PrmConfig {
    PhysAddr base = 0x80000000ull;
    std::uint64_t size = 128ull << 20;
    PhysAddr end() const { return base + size; }  // exclusive
};

struct NoiseConfig {
    // Master switch; false forces a fully noiseless run regardless of the
    // sigma values below.
    bool enabled = true;
    double dram_sigma = 8.0;          // gaussian on DRAM access latency
    double probe_flip_prob = 0.015;   // per-round Prime+Probe observation corruption
    double clock_sigma = 8.0;         // smuggled-clock jitter
    double clock_stale_prob = 0.005;  // smuggled-clock stale-read probability
    double victim_timing_sigma = 0.0; // per-compute-step jitter (victims scale this)
};

struct LogConfig {
    bool enabled = true;
    // Per-access events dominate log volume; scenarios with millions of
    // accesses turn them off and keep only structural events.
    bool access_events = true;
};

struct SimConfig {
    std::uint32_t schema_version = 1;
    TlbConfig tlb;
    CacheConfig cache;
    DramConfig dram;
    MemCostConfig mem;
    PrmConfig prm;
    NoiseConfig noise;
    LogConfig log;
    std::uint64_t phys_bytes = 16ull << 30;
    // Free-form scenario parameters (keys "scenario.*" from config files).
    std::map<std::string, std::string> extra;

    // Throws ConfigError describing the first violated constraint.
    void validate() const;

    // FNV-1a over the canonical key=value dump; stable across runs.
    std::string digest() const;

    // Canonical flat serialization (also the config-file format).
    void dump(std::ostream& os) const;

    std::uint64_t extra_u64(const std::string& key, std::uint64_t fallback) const;
    double extra_double(const std::string& key, double fallback) const;

    // Table "Configuration of the testbed" values. Identical to the
    // defaults; spelled out so callers can reset an edited config.
    static SimConfig testbed();
};

// Parses the key=value text format, or JSON when the first significant
// character is '{'. Unknown keys are an error except "scenario.*", which
// land in SimConfig::extra.
SimConfig load_config(std::istream& in, const std::string& origin = "<stream>");
SimConfig load_config_file(const std::string& path);

}  // namespace encsim
