#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "encsim/cache.hpp"
#include "encsim/config.hpp"
#include "encsim/dram.hpp"
#include "encsim/event_log.hpp"
#include "encsim/page_table.hpp"
#include "encsim/rng.hpp"
#include "encsim/tlb.hpp"
#include "encsim/types.hpp"

namespace encsim {

// Everything one memory reference produced.
struct AccessOutcome {
    Cycle latency = 0;    // translation + cache/DRAM cycles charged to the actor
    Cycle aex_cost = 0;   // nonzero when the access faulted (victim only)
    int tlb_level = -1;   // 0 = L1 hit, 1 = L2 hit, -1 = miss (walk or fault)
    bool page_walk = false;
    bool accessed_flag_set = false;  // accessed went 0->1 on this walk
    bool dirty_flag_set = false;
    int cache_level = -1;  // 0 = L1, 1 = L2, 2 = L3, 3 = memory
    bool dram_access = false;
    bool dram_row_hit = false;
    bool faulted = false;
    std::uint64_t vpn = 0;
    PhysAddr pa = 0;
};

struct ActorCounters {
    std::uint64_t accesses = 0;
    std::uint64_t tlb_hits_l1 = 0;
    std::uint64_t tlb_hits_l2 = 0;
    std::uint64_t page_walks = 0;
    std::uint64_t page_faults = 0;
    std::uint64_t cache_hits_l1 = 0;
    std::uint64_t cache_hits_l2 = 0;
    std::uint64_t cache_hits_l3 = 0;
    std::uint64_t mem_accesses = 0;
    std::uint64_t dram_row_hits = 0;
    std::uint64_t dram_row_conflicts = 0;
};

// The machine owns all shared hardware state of one scenario timeline:
// per-actor address spaces, per-core TLBs, the cache hierarchy, DRAM row
// buffers, the event log and the run PRNG. The engine owns the clock and
// calls set_now() before delegating actions.
class Machine {
public:
    Machine(const SimConfig& cfg, const std::vector<Actor>& actors, std::uint64_t machine_seed);

    // --- address space wiring -------------------------------------------
    void define_elrange(int actor, VirtAddr base, std::uint64_t len);
    AddressSpace& space(int actor);
    const AddressSpace& space(int actor) const;

    // Bump allocation; enclave pages come from the PRM, other pages from
    // outside it. map_page_at places a page at an explicit frame.
    std::uint64_t alloc_enclave_page(int actor, std::uint64_t vpn);
    std::uint64_t alloc_outside_page(int actor, std::uint64_t vpn);
    void map_page_at(int actor, std::uint64_t vpn, std::uint64_t ppn);
    bool ppn_free(std::uint64_t ppn) const;

    // Side-effect-free VA->PA resolution (the OS-level adversary knows the
    // full mapping; tests use it for oracles).
    PhysAddr resolve(int actor, VirtAddr va) const;

    // --- execution -------------------------------------------------------
    AccessOutcome access(int actor, VirtAddr va, AccessKind kind);

    // Asynchronous exit of the victim enclave: counts, flushes the victim
    // core's TLB (all entries, or only the victim PCID when selective
    // flushing is configured) and returns the configured cost.
    Cycle aex(AexReason reason);

    // --- adversary primitives (OS-level / co-tenant surface) -------------
    std::vector<FlagReadout> read_and_reset_flags(int target_actor,
                                                  const std::vector<std::uint64_t>& pages,
                                                  FlagSelect which);
    void set_pte_trap(int target_actor, std::uint64_t vpn, PteTrap trap);
    void clear_pte_traps(int target_actor, std::uint64_t vpn);
    void flush_cache_line(PhysAddr pa);

    using FaultHook = std::function<void(std::uint64_t vpn, AccessKind kind)>;
    void set_fault_hook(FaultHook hook) { fault_hook_ = std::move(hook); }

    // --- accessors --------------------------------------------------------
    Tlb& tlb_of(int actor) { return *tlbs_[actor_tlb_[actor]]; }
    CacheHierarchy& caches() { return caches_; }
    DramState& dram() { return dram_; }
    SeededRng& rng() { return rng_; }
    EventLog& log() { return log_; }
    const SimConfig& config() const { return cfg_; }

    void set_now(Cycle c) { now_ = c; }
    Cycle now() const { return now_; }

    std::uint64_t aex_count() const { return aex_count_; }
    ActorCounters& counters(int actor) { return counters_[actor]; }
    const ActorCounters& counters(int actor) const { return counters_.at(actor); }
    int core_of(int actor) const { return actor_core_[actor]; }

private:
    double dram_sigma() const {
        return cfg_.noise.enabled ? cfg_.noise.dram_sigma : 0.0;
    }

    SimConfig cfg_;
    std::vector<Actor> actors_;
    SeededRng rng_;
    EventLog log_;
    Cycle now_ = 0;
    std::uint64_t aex_count_ = 0;

    std::vector<std::unique_ptr<AddressSpace>> spaces_;  // per actor
    std::vector<std::unique_ptr<Tlb>> tlbs_;
    std::vector<int> actor_tlb_;   // actor -> tlb index
    std::vector<int> actor_core_;  // actor -> physical core (cache domain)
    CacheHierarchy caches_;
    DramState dram_;
    std::vector<ActorCounters> counters_;
    std::set<std::uint64_t> used_ppns_;
    std::uint64_t next_prm_ppn_;
    std::uint64_t next_out_ppn_;
    FaultHook fault_hook_;
};

}  // namespace encsim
