#include "encsim/page_table.hpp"

#include <sstream>

namespace encsim {
namespace {

std::string hexvpn(std::uint64_t vpn) {
    std::ostringstream os;
    os << "0x" << std::hex << (vpn << kPageShift);
    return os.str();
}

}  // namespace

void AddressSpace::map_page(std::uint64_t vpn, std::uint64_t ppn) {
    const VirtAddr va = vpn << kPageShift;
    const PhysAddr pa = ppn << kPageShift;
    if (in_elrange(va) != in_prm(pa)) {
        throw SimError("mapping violates ELRANGE<->PRM invariant at " + hexvpn(vpn));
    }
    if (table_.count(vpn)) throw SimError("page already mapped: " + hexvpn(vpn));
    auto [it, fresh] = phys_owner_.emplace(ppn, vpn);
    if (!fresh) throw SimError("physical page mapped twice within a space");
    PageTableEntry e;
    e.phys_page = ppn;
    table_.emplace(vpn, e);
}

PageTableEntry& AddressSpace::pte(std::uint64_t vpn) {
    auto it = table_.find(vpn);
    if (it == table_.end()) throw SimError("unmapped page: " + hexvpn(vpn));
    return it->second;
}

const PageTableEntry& AddressSpace::pte(std::uint64_t vpn) const {
    auto it = table_.find(vpn);
    if (it == table_.end()) throw SimError("unmapped page: " + hexvpn(vpn));
    return it->second;
}

std::vector<FlagReadout> AddressSpace::read_and_reset_flags(
    const std::vector<std::uint64_t>& pages, FlagSelect which) {
    std::vector<FlagReadout> out;
    out.reserve(pages.size());
    for (std::uint64_t vpn : pages) {
        PageTableEntry& e = pte(vpn);
        out.push_back(FlagReadout{vpn, e.accessed, e.dirty});
        if (which == FlagSelect::Accessed || which == FlagSelect::Both) e.accessed = false;
        if (which == FlagSelect::Dirty || which == FlagSelect::Both) e.dirty = false;
    }
    return out;
}

void AddressSpace::set_trap(std::uint64_t vpn, PteTrap trap) {
    PageTableEntry& e = pte(vpn);
    switch (trap) {
        case PteTrap::ClearPresent: e.present = false; break;
        case PteTrap::SetReserved: e.reserved_fault = true; break;
        case PteTrap::SetNx: e.nx = true; break;
    }
}

void AddressSpace::clear_traps(std::uint64_t vpn) {
    PageTableEntry& e = pte(vpn);
    e.present = true;
    e.reserved_fault = false;
    e.nx = false;
}

}  // namespace encsim
