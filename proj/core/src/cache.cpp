#include "encsim/cache.hpp"

#include <algorithm>
#include <bit>

namespace encsim {

LlcSet llc_set_of(const CacheConfig& cfg, PhysAddr pa) {
    const std::uint64_t line = pa >> kLineShift;
    const std::uint32_t set = static_cast<std::uint32_t>(line % cfg.l3.sets);
    std::uint32_t slice = 0;
    if (cfg.llc_slices > 1 && cfg.slice_hash == SliceHash::XorFold) {
        const unsigned bits = static_cast<unsigned>(std::bit_width(cfg.llc_slices) - 1);
        std::uint64_t v = pa >> kLineShift;
        std::uint64_t folded = 0;
        while (v) {
            folded ^= v & ((1ull << bits) - 1);
            v >>= bits;
        }
        slice = static_cast<std::uint32_t>(folded);
    }
    return LlcSet{slice, set};
}

bool CacheHierarchy::Level::lookup_touch(std::uint32_t set, std::uint64_t line) {
    auto& s = data[set];
    for (auto it = s.begin(); it != s.end(); ++it) {
        if (*it == line) {
            const std::uint64_t v = *it;
            s.erase(it);
            s.insert(s.begin(), v);
            return true;
        }
    }
    return false;
}

bool CacheHierarchy::Level::fill(std::uint32_t set, std::uint64_t line, std::uint64_t& evicted) {
    auto& s = data[set];
    for (auto it = s.begin(); it != s.end(); ++it) {
        if (*it == line) {
            s.erase(it);
            break;
        }
    }
    bool did_evict = false;
    if (s.size() >= ways) {
        evicted = s.back();
        did_evict = true;
        s.pop_back();
    }
    s.insert(s.begin(), line);
    return did_evict;
}

void CacheHierarchy::Level::drop(std::uint32_t set, std::uint64_t line) {
    auto& s = data[set];
    s.erase(std::remove(s.begin(), s.end(), line), s.end());
}

CacheHierarchy::CacheHierarchy(const CacheConfig& cfg, int cores) : cfg_(cfg), cores_(cores) {
    auto make = [](const CacheLevelConfig& geo) {
        Level lvl;
        lvl.sets = geo.sets;
        lvl.ways = geo.ways;
        lvl.data.resize(geo.sets);
        return lvl;
    };
    for (int c = 0; c < cores; ++c) {
        l1i_.push_back(make(cfg.l1));
        l1d_.push_back(make(cfg.l1));
        l2_.push_back(make(cfg.l2));
    }
    for (std::uint32_t s = 0; s < cfg.llc_slices; ++s) l3_.push_back(make(cfg.l3));
}

CacheHierarchy::Level& CacheHierarchy::l1_for(int core, AccessKind kind) {
    return kind == AccessKind::CodeFetch ? l1i_[core] : l1d_[core];
}

std::uint32_t CacheHierarchy::set_of(const Level& lvl, std::uint64_t line) const {
    return static_cast<std::uint32_t>(line % lvl.sets);
}

void CacheHierarchy::back_invalidate(std::uint64_t line) {
    for (int c = 0; c < cores_; ++c) {
        l1i_[c].drop(set_of(l1i_[c], line), line);
        l1d_[c].drop(set_of(l1d_[c], line), line);
        l2_[c].drop(set_of(l2_[c], line), line);
    }
}

void CacheHierarchy::access_line(int core, std::uint64_t line, AccessKind kind, CacheResult& out,
                                 bool count_latency) {
    Level& l1 = l1_for(core, kind);
    Level& l2 = l2_[core];
    const LlcSet loc = llc_set_of(cfg_, line << kLineShift);
    Level& l3 = l3_[loc.slice];

    if (l1.lookup_touch(set_of(l1, line), line)) {
        if (count_latency) {
            out.hit_level = 0;
            out.latency = cfg_.l1.latency;
        }
        return;
    }
    std::uint64_t evicted = 0;
    if (l2.lookup_touch(set_of(l2, line), line)) {
        l1.fill(set_of(l1, line), line, evicted);
        if (count_latency) {
            out.hit_level = 1;
            out.latency = cfg_.l2.latency;
        }
        return;
    }
    if (l3.lookup_touch(loc.set, line)) {
        l1.fill(set_of(l1, line), line, evicted);
        l2.fill(set_of(l2, line), line, evicted);
        if (count_latency) {
            out.hit_level = 2;
            out.latency = cfg_.l3.latency;
        }
        return;
    }
    // Full miss: fill downward from memory.
    if (l3.fill(loc.set, line, evicted) && cfg_.inclusive_llc) back_invalidate(evicted);
    l1.fill(set_of(l1, line), line, evicted);
    l2.fill(set_of(l2, line), line, evicted);
    if (count_latency) {
        out.hit_level = 3;
        out.latency = cfg_.l3.latency;  // caller adds DRAM latency
    }
}

CacheResult CacheHierarchy::access(int core, PhysAddr pa, AccessKind kind) {
    CacheResult out{0, 0};
    const std::uint64_t line = pa >> kLineShift;
    access_line(core, line, kind, out, true);
    if (cfg_.next_line_prefetcher && out.hit_level >= 2) {
        CacheResult scratch{0, 0};
        access_line(core, line + 1, kind, scratch, false);
    }
    return out;
}

void CacheHierarchy::flush_line(PhysAddr pa) {
    const std::uint64_t line = pa >> kLineShift;
    const LlcSet loc = llc_set_of(cfg_, pa);
    l3_[loc.slice].drop(loc.set, line);
    back_invalidate(line);
}

bool CacheHierarchy::resident_l3(PhysAddr pa) const {
    const std::uint64_t line = pa >> kLineShift;
    const LlcSet loc = llc_set_of(cfg_, pa);
    const auto& s = l3_[loc.slice].data[loc.set];
    return std::find(s.begin(), s.end(), line) != s.end();
}

bool CacheHierarchy::resident_private(int core, PhysAddr pa, AccessKind kind) const {
    const std::uint64_t line = pa >> kLineShift;
    const Level& l1 = kind == AccessKind::CodeFetch ? l1i_[core] : l1d_[core];
    const auto& s1 = l1.data[line % l1.sets];
    if (std::find(s1.begin(), s1.end(), line) != s1.end()) return true;
    const Level& l2 = l2_[core];
    const auto& s2 = l2.data[line % l2.sets];
    return std::find(s2.begin(), s2.end(), line) != s2.end();
}

}  // namespace encsim
