#include "encsim/machine.hpp"

#include <algorithm>

namespace encsim {
namespace {

constexpr std::uint64_t kOutsideAllocBase = 0x00400000ull >> kPageShift;

}  // namespace

Machine::Machine(const SimConfig& cfg, const std::vector<Actor>& actors,
                 std::uint64_t machine_seed)
    : cfg_(cfg),
      actors_(actors),
      rng_(machine_seed),
      caches_(cfg.cache, [&] {
          int max_core = 0;
          for (const Actor& a : actors) max_core = std::max(max_core, a.core);
          return max_core + 1;
      }()),
      dram_(cfg.dram),
      next_prm_ppn_(cfg.prm.base >> kPageShift),
      next_out_ppn_(kOutsideAllocBase) {
    cfg_.validate();
    log_.configure(cfg.log.enabled, cfg.log.access_events);
    if (actors_.empty() || actors_[0].kind != ActorKind::Victim || actors_[0].id != 0)
        throw SimError("actor 0 must be the victim");
    for (std::size_t i = 1; i < actors_.size(); ++i)
        if (actors_[i].kind != ActorKind::Attacker)
            throw SimError("exactly one victim actor per scenario");

    counters_.resize(actors_.size());
    actor_tlb_.resize(actors_.size());
    actor_core_.resize(actors_.size());
    spaces_.resize(actors_.size());

    // Victim owns TLB 0 on core 0. A colocated attacker shares that TLB
    // when sharing is configured (the HyperThreading model), otherwise it
    // gets a private instance on the same core. Other attackers run on
    // their own cores with their own TLBs.
    tlbs_.push_back(std::make_unique<Tlb>(cfg.tlb));
    actor_tlb_[0] = 0;
    actor_core_[0] = 0;
    for (std::size_t i = 1; i < actors_.size(); ++i) {
        const Actor& a = actors_[i];
        if (a.colocated) {
            actor_core_[i] = 0;
            if (cfg.tlb.shared_across_logical_cores) {
                actor_tlb_[i] = 0;
            } else {
                tlbs_.push_back(std::make_unique<Tlb>(cfg.tlb));
                actor_tlb_[i] = static_cast<int>(tlbs_.size() - 1);
            }
        } else {
            actor_core_[i] = a.core > 0 ? a.core : static_cast<int>(i);
            tlbs_.push_back(std::make_unique<Tlb>(cfg.tlb));
            actor_tlb_[i] = static_cast<int>(tlbs_.size() - 1);
        }
    }
    for (std::size_t i = 0; i < actors_.size(); ++i) {
        // PCID = actor id + 1; spaces start with an empty ELRANGE until the
        // scenario defines one.
        spaces_[i] = std::make_unique<AddressSpace>(static_cast<std::uint16_t>(i + 1), 0, 0,
                                                    cfg.prm.base, cfg.prm.size);
    }
}

void Machine::define_elrange(int actor, VirtAddr base, std::uint64_t len) {
    auto& old = *spaces_[actor];
    if (!old.mapping().empty()) throw SimError("define_elrange must precede mappings");
    spaces_[actor] = std::make_unique<AddressSpace>(old.pcid(), base, len, cfg_.prm.base,
                                                    cfg_.prm.size);
}

AddressSpace& Machine::space(int actor) { return *spaces_[actor]; }
const AddressSpace& Machine::space(int actor) const { return *spaces_[actor]; }

bool Machine::ppn_free(std::uint64_t ppn) const { return used_ppns_.count(ppn) == 0; }

std::uint64_t Machine::alloc_enclave_page(int actor, std::uint64_t vpn) {
    const std::uint64_t prm_end_ppn = cfg_.prm.end() >> kPageShift;
    while (next_prm_ppn_ < prm_end_ppn && !ppn_free(next_prm_ppn_)) ++next_prm_ppn_;
    if (next_prm_ppn_ >= prm_end_ppn) throw SimError("PRM exhausted");
    const std::uint64_t ppn = next_prm_ppn_++;
    map_page_at(actor, vpn, ppn);
    return ppn;
}

std::uint64_t Machine::alloc_outside_page(int actor, std::uint64_t vpn) {
    const std::uint64_t prm_lo = cfg_.prm.base >> kPageShift;
    const std::uint64_t prm_hi = cfg_.prm.end() >> kPageShift;
    const std::uint64_t phys_pages = cfg_.phys_bytes >> kPageShift;
    while (true) {
        if (next_out_ppn_ >= prm_lo && next_out_ppn_ < prm_hi) next_out_ppn_ = prm_hi;
        if (next_out_ppn_ >= phys_pages) throw SimError("physical memory exhausted");
        if (ppn_free(next_out_ppn_)) break;
        ++next_out_ppn_;
    }
    const std::uint64_t ppn = next_out_ppn_++;
    map_page_at(actor, vpn, ppn);
    return ppn;
}

void Machine::map_page_at(int actor, std::uint64_t vpn, std::uint64_t ppn) {
    if (!ppn_free(ppn)) throw SimError("physical page already in use");
    if ((ppn << kPageShift) >= cfg_.phys_bytes) throw SimError("ppn outside physical range");
    spaces_[actor]->map_page(vpn, ppn);
    used_ppns_.insert(ppn);
}

PhysAddr Machine::resolve(int actor, VirtAddr va) const {
    const PageTableEntry& e = spaces_[actor]->pte(page_number(va));
    return (e.phys_page << kPageShift) | page_offset(va);
}

AccessOutcome Machine::access(int actor, VirtAddr va, AccessKind kind) {
    AccessOutcome out;
    out.vpn = page_number(va);
    AddressSpace& as = *spaces_[actor];
    Tlb& tlb = *tlbs_[actor_tlb_[actor]];
    ActorCounters& ctr = counters_[actor];
    ++ctr.accesses;

    const TlbLookup hit = tlb.lookup(out.vpn, as.pcid(), kind);
    if (hit.hit) {
        // Translation served from the TLB: the PTE is not consulted, so
        // neither flags nor traps are visible on this path.
        out.tlb_level = hit.level;
        if (hit.level == 0)
            ++ctr.tlb_hits_l1;
        else
            ++ctr.tlb_hits_l2;
        out.pa = (hit.ppn << kPageShift) | page_offset(va);
        log_.append(now_, actor, EventKind::TlbHit, out.vpn,
                    static_cast<std::uint64_t>(hit.level));
    } else {
        log_.append(now_, actor, EventKind::TlbMiss, out.vpn, 0);
        PageTableEntry& pte = as.pte(out.vpn);
        out.latency += cfg_.mem.page_walk_latency;
        const bool fault = !pte.present || pte.reserved_fault ||
                           (pte.nx && kind == AccessKind::CodeFetch);
        if (fault) {
            ++ctr.page_faults;
            out.faulted = true;
            log_.append(now_, actor, EventKind::PageFault, out.vpn,
                        static_cast<std::uint64_t>(kind));
            out.aex_cost = aex(AexReason::PageFault);
            if (fault_hook_) fault_hook_(out.vpn, kind);
            return out;
        }
        ++ctr.page_walks;
        out.page_walk = true;
        out.accessed_flag_set = !pte.accessed;
        pte.accessed = true;
        if (kind == AccessKind::DataWrite) {
            out.dirty_flag_set = !pte.dirty;
            pte.dirty = true;
        }
        tlb.insert(out.vpn, as.pcid(), pte.phys_page, kind, rng_);
        out.pa = (pte.phys_page << kPageShift) | page_offset(va);
        log_.append(now_, actor, EventKind::PageWalk, out.vpn,
                    out.accessed_flag_set ? 1 : 0);
    }

    const CacheResult cr = caches_.access(actor_core_[actor], out.pa, kind);
    out.cache_level = cr.hit_level;
    out.latency += cr.latency;
    switch (cr.hit_level) {
        case 0: ++ctr.cache_hits_l1; break;
        case 1: ++ctr.cache_hits_l2; break;
        case 2: ++ctr.cache_hits_l3; break;
        default: break;
    }
    if (cr.hit_level == 3) {
        ++ctr.mem_accesses;
        log_.append(now_, actor, EventKind::CacheMiss, line_address(out.pa), 2);
        const DramResult dr = dram_.access(out.pa, rng_, dram_sigma());
        out.dram_access = true;
        out.dram_row_hit = dr.row_hit;
        out.latency += dr.latency;
        if (dr.row_hit)
            ++ctr.dram_row_hits;
        else
            ++ctr.dram_row_conflicts;
        log_.append(now_, actor, EventKind::DramAccess, dram_map(cfg_.dram, out.pa).row,
                    dr.row_hit ? 1 : 0);
    }
    log_.append(now_, actor, EventKind::Access, va, out.latency);
    return out;
}

Cycle Machine::aex(AexReason reason) {
    ++aex_count_;
    Tlb& victim_tlb = *tlbs_[actor_tlb_[0]];
    if (cfg_.tlb.pcid_selective_flush) {
        victim_tlb.flush_pcid(spaces_[0]->pcid());
        log_.append(now_, 0, EventKind::TlbFlush, 1, spaces_[0]->pcid());
    } else {
        victim_tlb.flush_all();
        log_.append(now_, 0, EventKind::TlbFlush, 0, 0);
    }
    Cycle cost = 0;
    switch (reason) {
        case AexReason::PageFault: cost = cfg_.mem.page_fault_aex_cost; break;
        case AexReason::IpiShootdown: cost = cfg_.mem.shootdown_aex_cost; break;
        case AexReason::Other: cost = cfg_.mem.other_aex_cost; break;
    }
    log_.append(now_, 0, EventKind::Aex, static_cast<std::uint64_t>(reason), cost);
    return cost;
}

std::vector<FlagReadout> Machine::read_and_reset_flags(int target_actor,
                                                       const std::vector<std::uint64_t>& pages,
                                                       FlagSelect which) {
    return spaces_[target_actor]->read_and_reset_flags(pages, which);
}

void Machine::set_pte_trap(int target_actor, std::uint64_t vpn, PteTrap trap) {
    spaces_[target_actor]->set_trap(vpn, trap);
}

void Machine::clear_pte_traps(int target_actor, std::uint64_t vpn) {
    spaces_[target_actor]->clear_traps(vpn);
}

void Machine::flush_cache_line(PhysAddr pa) { caches_.flush_line(pa); }

}  // namespace encsim
