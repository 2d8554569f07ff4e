#pragma once

#include <cstdint>
#include <vector>

#include "encsim/config.hpp"
#include "encsim/rng.hpp"
#include "encsim/types.hpp"

namespace encsim {

enum class TlbLevelKind : std::uint8_t { ITlb, DTlb, L2 };

// Set index functions: bits 12..14 of the VA pick the iTLB set, bits 12..15
// the dTLB set; the L2 index uses vpn mod sets (the hash is not published,
// this is the simplest consistent choice).
std::uint32_t tlb_set_index(const TlbConfig& cfg, std::uint64_t vpn, TlbLevelKind level);

// `count` distinct page numbers whose translations land in target_vpn's set:
// an arithmetic progression with stride = number of sets, starting just
// above target_vpn.
std::vector<std::uint64_t> build_tlb_eviction_set(const TlbConfig& cfg, std::uint64_t target_vpn,
                                                  TlbLevelKind level, std::size_t count);

struct TlbLookup {
    bool hit = false;
    int level = -1;  // 0 = L1 (i or d), 1 = unified L2
    std::uint64_t ppn = 0;
};

// One structure per physical core. Both logical cores of a HyperThreaded
// pair address the same instance when sharing is configured.
class Tlb {
public:
    explicit Tlb(const TlbConfig& cfg);

    // L1 (kind-selected) then L2. An L2 hit refills the L1 entry.
    TlbLookup lookup(std::uint64_t vpn, std::uint16_t pcid, AccessKind kind);

    // Post-walk fill of L1 and L2, with per-set LRU (or random) eviction.
    void insert(std::uint64_t vpn, std::uint16_t pcid, std::uint64_t ppn, AccessKind kind,
                SeededRng& rng);

    void flush_all();
    void flush_pcid(std::uint16_t pcid);

    std::size_t resident_entries(TlbLevelKind level) const;
    bool holds(std::uint64_t vpn, std::uint16_t pcid, TlbLevelKind level) const;

private:
    struct Entry {
        std::uint64_t vpn;
        std::uint16_t pcid;
        std::uint64_t ppn;
    };
    struct Level {
        TlbLevelConfig geo;
        // set -> MRU-ordered entries (front = most recent)
        std::vector<std::vector<Entry>> sets;
    };

    Level& level_for(TlbLevelKind k);
    const Level& level_for(TlbLevelKind k) const;
    void insert_into(Level& lvl, std::uint32_t set, const Entry& e, SeededRng& rng);

    TlbConfig cfg_;
    Level itlb_, dtlb_, l2_;
};

}  // namespace encsim
