#include <algorithm>
#include <cmath>

#include "encsim/attack.hpp"

namespace encsim {
namespace {

// Attacker-owned cache lines congruent with `target_pa` at the LLC. Line k
// sits k * (sets * 64) bytes above the target's in-set offset; frames
// already taken (or excluded by the caller) are skipped.
std::vector<VirtAddr> build_llc_eviction_lines(MachineView& mv, PhysAddr target_pa,
                                               std::size_t count, std::uint64_t vpn_base,
                                               bool avoid_target_bank) {
    const CacheConfig& cache = mv.config().cache;
    const DramConfig& dram = mv.config().dram;
    const std::uint64_t stride = std::uint64_t{cache.l3.sets} * kLineSize;
    const std::uint64_t offset = target_pa % stride;
    const DramAddr target_bank = dram_map(dram, target_pa);
    std::vector<VirtAddr> lines;
    std::uint64_t vpn = vpn_base;
    for (std::uint64_t k = 1; lines.size() < count; ++k) {
        const PhysAddr pa = offset + k * stride;
        if (pa >= mv.config().phys_bytes) throw SimError("ran out of congruent lines");
        const std::uint64_t ppn = pa >> kPageShift;
        if (!mv.ppn_free(ppn)) continue;
        if (mv.config().prm.base <= pa && pa < mv.config().prm.end()) continue;
        // Keeping the pin set out of the target's DRAM bank avoids closing
        // the row the DRAMA leg listens on.
        if (avoid_target_bank && dram_map(dram, pa).same_bank(target_bank)) continue;
        mv.map_own_page_at(vpn, ppn);
        lines.push_back((vpn << kPageShift) | page_offset(pa));
        ++vpn;
    }
    return lines;
}

bool median3(const std::vector<bool>& v, std::size_t i) {
    if (v.size() < 2) return !v.empty() && v[0];
    const bool a = v[i > 0 ? i - 1 : 0];
    const bool b = v[i];
    const bool c = v[i + 1 < v.size() ? i + 1 : v.size() - 1];
    return (a && b) || (b && c) || (a && c);
}

std::vector<bool> smooth(const std::vector<bool>& v) {
    std::vector<bool> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = median3(v, i);
    return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Prime+Probe

void PrimeProbeAttack::attach(MachineView& mv, const VictimLayoutInfo&) {
    const std::size_t ways = mv.config().cache.l3.ways;
    square_lines_ = build_llc_eviction_lines(mv, mv.resolve_victim(square_va_), ways, 0x60000,
                                             false);
    multiply_lines_ = build_llc_eviction_lines(mv, mv.resolve_victim(multiply_va_), ways,
                                               0x68000, false);
    // Prime both sets once so the first probe starts from a known state.
    for (VirtAddr va : square_lines_) mv.touch(va);
    for (VirtAddr va : multiply_lines_) mv.touch(va);
}

std::uint32_t PrimeProbeAttack::probe(MachineView& mv, const std::vector<VirtAddr>& lines) {
    std::uint32_t misses = 0;
    for (VirtAddr va : lines) {
        const AccessOutcome out = mv.touch(va);
        if (out.cache_level == 3) ++misses;
    }
    return misses;
}

Cycle PrimeProbeAttack::wake(MachineView& mv, Cycle now) {
    Round r;
    r.cycle = now;
    r.square_misses = probe(mv, square_lines_);
    r.multiply_misses = probe(mv, multiply_lines_);
    const NoiseConfig& noise = mv.config().noise;
    if (noise.enabled && noise.probe_flip_prob > 0.0) {
        if (mv.rng().bernoulli(noise.probe_flip_prob))
            r.square_misses = r.square_misses > 0 ? 0 : 1;
        if (mv.rng().bernoulli(noise.probe_flip_prob))
            r.multiply_misses = r.multiply_misses > 0 ? 0 : 1;
    }
    mv.log_probe(0, r.square_misses);
    mv.log_probe(1, r.multiply_misses);
    rounds_.push_back(r);
    return now + period_;
}

std::string PrimeProbeAttack::recover_bits() const {
    std::vector<bool> sq, mul;
    sq.reserve(rounds_.size());
    mul.reserve(rounds_.size());
    for (const Round& r : rounds_) {
        sq.push_back(r.square_misses > 0);
        mul.push_back(r.multiply_misses > 0);
    }
    sq = smooth(sq);
    mul = smooth(mul);

    // Each maximal run of square activity is one exponent bit; multiply
    // activity before the next square run makes it a 1.
    std::vector<std::pair<std::size_t, std::size_t>> runs;  // [start, end)
    std::size_t i = 0;
    while (i < sq.size()) {
        if (!sq[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < sq.size() && sq[j]) ++j;
        runs.emplace_back(i, j);
        i = j;
    }
    std::string bits;
    for (std::size_t r = 0; r < runs.size(); ++r) {
        const std::size_t window_end = r + 1 < runs.size() ? runs[r + 1].first : sq.size();
        bool one = false;
        for (std::size_t k = runs[r].first; k < window_end; ++k) one |= mul[k];
        bits.push_back(one ? '1' : '0');
    }
    return bits;
}

// ---------------------------------------------------------------------------
// DRAMA

void DramaAttack::attach(MachineView& mv, const VictimLayoutInfo&) {
    const PhysAddr target_pa = mv.resolve_victim(target_va_);
    const DramConfig& dram = mv.config().dram;
    // Co-resident EPC pages: grab every free frame of the target's row
    // region (the enclaves share the EPC range).
    const std::uint64_t region_bytes = 1ull << dram.row_shift;
    const std::uint64_t region_base_ppn = (target_pa & ~(region_bytes - 1)) >> kPageShift;
    const std::uint64_t region_pages = region_bytes >> kPageShift;
    const VirtAddr vpn_base = 0x1000000ull * (mv.actor() + 1);

    std::vector<std::uint64_t> own_ppns;
    std::map<std::uint64_t, std::uint64_t> ppn_to_vpn;
    std::uint64_t vpn = vpn_base;
    for (std::uint64_t i = 0; i < 2 * region_pages; ++i) {
        const std::uint64_t ppn = region_base_ppn + i;
        if ((ppn << kPageShift) >= mv.config().prm.end()) break;
        if (!mv.ppn_free(ppn)) continue;
        mv.map_own_page_at(vpn, ppn);
        own_ppns.push_back(ppn);
        ppn_to_vpn[ppn] = vpn;
        ++vpn;
    }
    const auto pair = find_row_pair(dram, target_pa, own_ppns);
    if (!pair) throw SimError("drama: no row pair found in attacker allocation");
    p_ = pair->same_row;
    p_prime_ = pair->conflict_row;
    p_va_ = (ppn_to_vpn.at(p_ >> kPageShift) << kPageShift) | page_offset(p_);
    p_prime_va_ = (ppn_to_vpn.at(p_prime_ >> kPageShift) << kPageShift) | page_offset(p_prime_);

    // Warm translations so measured latency is cache+DRAM only.
    mv.touch(p_va_);
    mv.touch(p_prime_va_);
    const NoiseConfig& noise = mv.config().noise;
    clock_ = std::make_unique<SmuggledClock>(noise.enabled ? noise.clock_sigma : 0.0,
                                             noise.enabled ? noise.clock_stale_prob : 0.0);
}

Cycle DramaAttack::wake(MachineView& mv, Cycle now) {
    if (!primed_) {
        // Close the target row, then listen.
        mv.flush_line(p_prime_);
        mv.touch(p_prime_va_);
        primed_ = true;
        primed_at_ = now;
        return now + dwell_;
    }
    mv.flush_line(p_);
    const Cycle t0 = clock_->read(now, mv.rng());
    const AccessOutcome out = mv.touch(p_va_);
    const Cycle t1 = clock_->read(now + out.latency, mv.rng());
    Measure m;
    m.cycle = now;
    m.window = now - primed_at_;
    m.latency = t1 > t0 ? t1 - t0 : 0;
    m.true_hit = out.dram_row_hit;
    measures_.push_back(m);
    mv.log_probe(2, m.latency);
    primed_ = false;
    const Cycle rest = period_ > dwell_ ? period_ - dwell_ : 1;
    return now + rest;
}

Cycle DramaAttack::calibrate_threshold() const {
    std::vector<Cycle> lat;
    lat.reserve(measures_.size());
    for (const Measure& m : measures_) lat.push_back(m.latency);
    std::sort(lat.begin(), lat.end());
    // Stale clock reads leave far outliers (zeros and sums of whole probe
    // periods); trim before looking for the mode gap.
    const std::size_t trim = lat.size() / 50;
    if (lat.size() > 2 * trim + 2)
        lat = std::vector<Cycle>(lat.begin() + trim, lat.end() - trim);
    return TspmAttack::split_threshold(std::move(lat));
}

std::vector<bool> DramaAttack::classify_hits() const {
    // Two-sided hit window around the row-hit mode: the midpoint threshold
    // caps it from above, and implausibly small readings (stale clock
    // artifacts) fall below it.
    const Cycle hi = calibrate_threshold();
    std::vector<Cycle> low_mode;
    for (const Measure& m : measures_)
        if (m.latency <= hi) low_mode.push_back(m.latency);
    std::vector<bool> hits(measures_.size(), false);
    if (low_mode.empty()) return hits;
    std::sort(low_mode.begin(), low_mode.end());
    const Cycle center = low_mode[low_mode.size() / 2];
    const Cycle half = hi > center ? hi - center : 1;
    const Cycle lo = center > half ? center - half : 0;
    for (std::size_t i = 0; i < measures_.size(); ++i)
        hits[i] = measures_[i].latency >= lo && measures_[i].latency <= hi;
    return hits;
}

// ---------------------------------------------------------------------------
// LLC pin

void LlcPinAttack::attach(MachineView& mv, const VictimLayoutInfo&) {
    const std::size_t ways = mv.config().cache.l3.ways;
    lines_ = build_llc_eviction_lines(mv, mv.resolve_victim(target_va_), ways, 0x70000,
                                      /*avoid_target_bank=*/true);
    for (VirtAddr va : lines_) mv.touch(va);
}

Cycle LlcPinAttack::wake(MachineView& mv, Cycle now) {
    for (VirtAddr va : lines_) {
        const AccessOutcome out = mv.touch(va);
        if (out.cache_level == 3) ++miss_total_;
    }
    return now + period_;
}

// ---------------------------------------------------------------------------
// TLB probing

void TlbProbeAttack::attach(MachineView& mv, const VictimLayoutInfo&) {
    const TlbConfig& tlb = mv.config().tlb;
    sets_ = tlb.dtlb.sets;
    const std::uint64_t base_vpn = 0x20000;  // multiple of the set count
    eviction_vas_.resize(sets_);
    for (std::uint32_t s = 0; s < sets_; ++s) {
        for (std::uint32_t w = 0; w < tlb.dtlb.ways; ++w) {
            const std::uint64_t vpn = base_vpn + s + std::uint64_t{w} * sets_;
            mv.map_own_page(vpn);
            eviction_vas_[s].push_back(vpn << kPageShift);
        }
    }
    // Warm round: fill every probed set with our own translations.
    for (const auto& set : eviction_vas_)
        for (VirtAddr va : set) mv.touch(va, AccessKind::DataRead);
}

Cycle TlbProbeAttack::wake(MachineView& mv, Cycle now) {
    Round r;
    r.cycle = now;
    r.misses.resize(sets_, 0);
    for (std::uint32_t s = 0; s < sets_; ++s) {
        for (VirtAddr va : eviction_vas_[s]) {
            const AccessOutcome out = mv.touch(va, AccessKind::DataRead);
            if (out.tlb_level != 0) ++r.misses[s];  // dTLB miss (perf-counter view)
        }
        if (r.misses[s]) mv.log_probe(3 + s, r.misses[s]);
    }
    rounds_.push_back(std::move(r));
    return now + period_;
}

std::string TlbProbeAttack::signature() const {
    std::string sig;
    for (const Round& r : rounds_) {
        bool any = false;
        for (std::uint32_t s = 0; s < sets_; ++s) {
            if (r.misses[s]) {
                if (!any) sig += "r";
                any = true;
                sig += ":" + std::to_string(s);
            }
        }
        if (any) sig += ";";
    }
    return sig;
}

// ---------------------------------------------------------------------------
// Nearest centroid

void NearestCentroid::fit(const std::vector<std::vector<double>>& samples,
                          const std::vector<int>& labels) {
    centroids_.clear();
    labels_.clear();
    std::map<int, std::pair<std::vector<double>, std::size_t>> acc;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        auto& [sum, n] = acc[labels[i]];
        if (sum.empty()) sum.assign(samples[i].size(), 0.0);
        for (std::size_t d = 0; d < samples[i].size(); ++d) sum[d] += samples[i][d];
        ++n;
    }
    for (auto& [label, entry] : acc) {
        auto& [sum, n] = entry;
        for (double& v : sum) v /= static_cast<double>(n);
        centroids_.push_back(sum);
        labels_.push_back(label);
    }
}

int NearestCentroid::predict(const std::vector<double>& sample) const {
    int best = -1;
    double best_d = 0.0;
    for (std::size_t c = 0; c < centroids_.size(); ++c) {
        double d = 0.0;
        for (std::size_t i = 0; i < sample.size() && i < centroids_[c].size(); ++i) {
            const double diff = sample[i] - centroids_[c][i];
            d += diff * diff;
        }
        if (best < 0 || d < best_d) {
            best_d = d;
            best = labels_[c];
        }
    }
    return best;
}

}  // namespace encsim
