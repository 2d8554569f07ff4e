#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "encsim/types.hpp"

namespace encsim {

// Single-level translation entry. The multi-level walk collapses to one
// lookup because the attacks observe only PTE flags and faults; walk cost is
// a config constant.
struct PageTableEntry {
    std::uint64_t phys_page = 0;
    bool present = true;
    bool accessed = false;
    bool dirty = false;
    bool nx = false;
    bool reserved_fault = false;
};

enum class PteTrap : std::uint8_t { ClearPresent, SetReserved, SetNx };
enum class FlagSelect : std::uint8_t { Accessed, Dirty, Both, None };

struct FlagReadout {
    std::uint64_t vpn;
    bool accessed_was_set;
    bool dirty_was_set;
};

class AddressSpace {
public:
    AddressSpace(std::uint16_t pcid, VirtAddr elrange_base, std::uint64_t elrange_len,
                 PhysAddr prm_base, std::uint64_t prm_len)
        : pcid_(pcid),
          elrange_base_(elrange_base),
          elrange_len_(elrange_len),
          prm_base_(prm_base),
          prm_len_(prm_len) {}

    std::uint16_t pcid() const { return pcid_; }

    bool in_elrange(VirtAddr va) const {
        return va >= elrange_base_ && va - elrange_base_ < elrange_len_;
    }
    bool in_prm(PhysAddr pa) const { return pa >= prm_base_ && pa - prm_base_ < prm_len_; }

    // Enclave pages must map into PRM and non-enclave pages outside it;
    // physical pages are never mapped twice within a space.
    void map_page(std::uint64_t vpn, std::uint64_t ppn);

    bool mapped(std::uint64_t vpn) const { return table_.count(vpn) != 0; }
    PageTableEntry& pte(std::uint64_t vpn);
    const PageTableEntry& pte(std::uint64_t vpn) const;

    // B-SPM primitive: report current accessed/dirty flags of `pages` and
    // reset the selected ones. Does not touch the TLB.
    std::vector<FlagReadout> read_and_reset_flags(const std::vector<std::uint64_t>& pages,
                                                  FlagSelect which);

    void set_trap(std::uint64_t vpn, PteTrap trap);
    void clear_traps(std::uint64_t vpn);

    const std::map<std::uint64_t, PageTableEntry>& mapping() const { return table_; }

private:
    std::uint16_t pcid_;
    VirtAddr elrange_base_;
    std::uint64_t elrange_len_;
    PhysAddr prm_base_;
    std::uint64_t prm_len_;
    std::map<std::uint64_t, PageTableEntry> table_;  // vpn -> pte
    std::map<std::uint64_t, std::uint64_t> phys_owner_;  // ppn -> vpn
};

}  // namespace encsim
