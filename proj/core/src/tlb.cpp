#include "encsim/tlb.hpp"

#include <algorithm>

namespace encsim {

std::uint32_t tlb_set_index(const TlbConfig& cfg, std::uint64_t vpn, TlbLevelKind level) {
    switch (level) {
        case TlbLevelKind::ITlb: return static_cast<std::uint32_t>(vpn % cfg.itlb.sets);
        case TlbLevelKind::DTlb: return static_cast<std::uint32_t>(vpn % cfg.dtlb.sets);
        case TlbLevelKind::L2: return static_cast<std::uint32_t>(vpn % cfg.l2.sets);
    }
    return 0;
}

std::vector<std::uint64_t> build_tlb_eviction_set(const TlbConfig& cfg, std::uint64_t target_vpn,
                                                  TlbLevelKind level, std::size_t count) {
    std::uint64_t stride = 0;
    switch (level) {
        case TlbLevelKind::ITlb: stride = cfg.itlb.sets; break;
        case TlbLevelKind::DTlb: stride = cfg.dtlb.sets; break;
        case TlbLevelKind::L2: stride = cfg.l2.sets; break;
    }
    std::vector<std::uint64_t> pages;
    pages.reserve(count);
    for (std::size_t i = 1; i <= count; ++i) pages.push_back(target_vpn + i * stride);
    return pages;
}

Tlb::Tlb(const TlbConfig& cfg) : cfg_(cfg) {
    itlb_.geo = cfg.itlb;
    dtlb_.geo = cfg.dtlb;
    l2_.geo = cfg.l2;
    itlb_.sets.resize(cfg.itlb.sets);
    dtlb_.sets.resize(cfg.dtlb.sets);
    l2_.sets.resize(cfg.l2.sets);
}

Tlb::Level& Tlb::level_for(TlbLevelKind k) {
    switch (k) {
        case TlbLevelKind::ITlb: return itlb_;
        case TlbLevelKind::DTlb: return dtlb_;
        case TlbLevelKind::L2: return l2_;
    }
    return l2_;
}

const Tlb::Level& Tlb::level_for(TlbLevelKind k) const {
    return const_cast<Tlb*>(this)->level_for(k);
}

TlbLookup Tlb::lookup(std::uint64_t vpn, std::uint16_t pcid, AccessKind kind) {
    const TlbLevelKind l1kind =
        kind == AccessKind::CodeFetch ? TlbLevelKind::ITlb : TlbLevelKind::DTlb;
    Level& l1 = level_for(l1kind);
    auto& set1 = l1.sets[tlb_set_index(cfg_, vpn, l1kind)];
    for (auto it = set1.begin(); it != set1.end(); ++it) {
        if (it->vpn == vpn && it->pcid == pcid) {
            Entry e = *it;
            set1.erase(it);
            set1.insert(set1.begin(), e);
            return TlbLookup{true, 0, e.ppn};
        }
    }
    auto& set2 = l2_.sets[tlb_set_index(cfg_, vpn, TlbLevelKind::L2)];
    for (auto it = set2.begin(); it != set2.end(); ++it) {
        if (it->vpn == vpn && it->pcid == pcid) {
            Entry e = *it;
            set2.erase(it);
            set2.insert(set2.begin(), e);
            // L1 refill on an L2 hit; no page walk, so no flag updates.
            set1.insert(set1.begin(), e);
            if (set1.size() > l1.geo.ways) set1.pop_back();
            return TlbLookup{true, 1, e.ppn};
        }
    }
    return TlbLookup{};
}

void Tlb::insert_into(Level& lvl, std::uint32_t set, const Entry& e, SeededRng& rng) {
    auto& s = lvl.sets[set];
    for (auto it = s.begin(); it != s.end(); ++it) {
        if (it->vpn == e.vpn && it->pcid == e.pcid) {
            s.erase(it);
            break;
        }
    }
    if (s.size() >= lvl.geo.ways) {
        if (cfg_.replacement == Replacement::Random && s.size() > 1) {
            s.erase(s.begin() + static_cast<std::ptrdiff_t>(rng.uniform(s.size())));
        } else {
            s.pop_back();
        }
    }
    s.insert(s.begin(), e);
}

void Tlb::insert(std::uint64_t vpn, std::uint16_t pcid, std::uint64_t ppn, AccessKind kind,
                 SeededRng& rng) {
    const Entry e{vpn, pcid, ppn};
    const TlbLevelKind l1kind =
        kind == AccessKind::CodeFetch ? TlbLevelKind::ITlb : TlbLevelKind::DTlb;
    Level& l1 = level_for(l1kind);
    insert_into(l1, tlb_set_index(cfg_, vpn, l1kind), e, rng);
    insert_into(l2_, tlb_set_index(cfg_, vpn, TlbLevelKind::L2), e, rng);
}

void Tlb::flush_all() {
    for (Level* lvl : {&itlb_, &dtlb_, &l2_})
        for (auto& s : lvl->sets) s.clear();
}

void Tlb::flush_pcid(std::uint16_t pcid) {
    for (Level* lvl : {&itlb_, &dtlb_, &l2_})
        for (auto& s : lvl->sets)
            s.erase(std::remove_if(s.begin(), s.end(),
                                   [pcid](const Entry& e) { return e.pcid == pcid; }),
                    s.end());
}

std::size_t Tlb::resident_entries(TlbLevelKind level) const {
    const Level& lvl = level_for(level);
    std::size_t n = 0;
    for (const auto& s : lvl.sets) n += s.size();
    return n;
}

bool Tlb::holds(std::uint64_t vpn, std::uint16_t pcid, TlbLevelKind level) const {
    const Level& lvl = level_for(level);
    const auto& s = lvl.sets[tlb_set_index(cfg_, vpn, level)];
    return std::any_of(s.begin(), s.end(),
                       [&](const Entry& e) { return e.vpn == vpn && e.pcid == pcid; });
}

}  // namespace encsim
