#pragma once

#include <cstdint>
#include <vector>

#include "encsim/config.hpp"
#include "encsim/types.hpp"

namespace encsim {

struct LlcSet {
    std::uint32_t slice;
    std::uint32_t set;
};

// set = pa bits 6..6+log2(sets); slice = 0 for the single-slice default or
// an XOR fold of the upper line-address bits.
LlcSet llc_set_of(const CacheConfig& cfg, PhysAddr pa);

struct CacheResult {
    int hit_level;   // 0 = L1, 1 = L2, 2 = L3, 3 = memory
    Cycle latency;   // lookup cost; DRAM latency is added by the caller on memory
};

// Private L1i/L1d/L2 per physical core, one shared (optionally sliced) LLC.
// Inclusive LLC: evicting a line from L3 back-invalidates every private copy.
class CacheHierarchy {
public:
    CacheHierarchy(const CacheConfig& cfg, int cores);

    CacheResult access(int core, PhysAddr pa, AccessKind kind);

    // clflush semantics: drop the line everywhere.
    void flush_line(PhysAddr pa);

    bool resident_l3(PhysAddr pa) const;
    bool resident_private(int core, PhysAddr pa, AccessKind kind) const;

    const CacheConfig& config() const { return cfg_; }

private:
    struct Level {
        std::uint32_t sets = 0;
        std::uint32_t ways = 0;
        // set -> MRU-ordered line addresses
        std::vector<std::vector<std::uint64_t>> data;
        bool lookup_touch(std::uint32_t set, std::uint64_t line);
        bool fill(std::uint32_t set, std::uint64_t line, std::uint64_t& evicted);
        void drop(std::uint32_t set, std::uint64_t line);
    };

    Level& l1_for(int core, AccessKind kind);
    void back_invalidate(std::uint64_t line);
    std::uint32_t set_of(const Level& lvl, std::uint64_t line) const;
    void access_line(int core, std::uint64_t line, AccessKind kind, CacheResult& out,
                     bool count_latency);

    CacheConfig cfg_;
    int cores_;
    std::vector<Level> l1i_, l1d_, l2_;  // one per core
    std::vector<Level> l3_;              // one per slice
};

}  // namespace encsim
