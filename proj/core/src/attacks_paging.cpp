#include <algorithm>
#include <cstdlib>

#include "encsim/attack.hpp"

namespace encsim {

// ---------------------------------------------------------------------------
// Page-fault attack

void PageFaultAttack::attach(MachineView& mv, const VictimLayoutInfo&) {
    for (std::uint64_t vpn : monitored_) mv.set_pte_trap(vpn, PteTrap::ClearPresent);
    untrapped_.reset();
}

void PageFaultAttack::on_victim_fault(MachineView& mv, std::uint64_t vpn, AccessKind) {
    if (std::find(monitored_.begin(), monitored_.end(), vpn) == monitored_.end()) return;
    trace_.push_back(vpn);
    mv.log_detection(0, vpn);
    // Let the victim leave the faulting page, but re-arm the page it came
    // from so the next transition faults again.
    mv.clear_pte_traps(vpn);
    if (untrapped_ && *untrapped_ != vpn) mv.set_pte_trap(*untrapped_, PteTrap::ClearPresent);
    untrapped_ = vpn;
}

std::string PageFaultAttack::recover_bits(std::uint64_t delimiter_vpn, std::size_t count0,
                                          std::size_t count1) const {
    std::string bits;
    std::size_t seg = 0;
    for (std::uint64_t vpn : trace_) {
        ++seg;
        if (vpn != delimiter_vpn) continue;
        const auto d0 = seg > count0 ? seg - count0 : count0 - seg;
        const auto d1 = seg > count1 ? seg - count1 : count1 - seg;
        bits.push_back(d0 <= d1 ? '0' : '1');
        seg = 0;
    }
    return bits;
}

// ---------------------------------------------------------------------------
// B-SPM

void BspmAttack::attach(MachineView& mv, const VictimLayoutInfo&) {
    auto pages = monitored_;
    pages.push_back(trigger_);
    mv.read_and_reset_flags(pages, FlagSelect::Both);
}

Cycle BspmAttack::wake(MachineView& mv, Cycle now) {
    const auto trig = mv.read_and_reset_flags({trigger_}, FlagSelect::Accessed);
    if (trig[0].accessed_was_set) {
        mv.ipi_shootdown();
        const auto flags = mv.read_and_reset_flags(monitored_, FlagSelect::Accessed);
        Inspection ins;
        ins.cycle = now;
        for (const auto& f : flags)
            if (f.accessed_was_set) ins.pages.push_back(f.vpn);
        mv.log_probe(0, ins.pages.size());
        trace_.push_back(std::move(ins));
    }
    return now + period_;
}

std::string BspmAttack::recover_bits_by_segments(std::uint64_t delimiter_vpn) const {
    // Inspections between two sightings of the delimiter page track the
    // per-bit duration; the two duration clusters map to the bit values.
    std::vector<Cycle> seg_lengths;
    std::size_t seg = 0;
    for (const auto& ins : trace_) {
        ++seg;
        if (std::find(ins.pages.begin(), ins.pages.end(), delimiter_vpn) != ins.pages.end()) {
            seg_lengths.push_back(seg);
            seg = 0;
        }
    }
    if (seg_lengths.empty()) return {};
    const Cycle thr = TspmAttack::split_threshold(seg_lengths);
    std::string bits;
    for (Cycle len : seg_lengths) bits.push_back(len <= thr ? '0' : '1');
    return bits;
}

std::vector<std::vector<std::uint64_t>> BspmAttack::recover_page_sets() const {
    std::vector<std::vector<std::uint64_t>> sets;
    for (const auto& ins : trace_) {
        auto pages = ins.pages;
        std::sort(pages.begin(), pages.end());
        sets.push_back(std::move(pages));
    }
    return sets;
}

// ---------------------------------------------------------------------------
// T-SPM

void TspmAttack::attach(MachineView& mv, const VictimLayoutInfo&) {
    mv.read_and_reset_flags({alpha_, beta_}, FlagSelect::Both);
    state_ = State::WaitBoth;
}

Cycle TspmAttack::wake(MachineView& mv, Cycle now) {
    if (state_ == State::WaitBoth) {
        const auto flags = mv.read_and_reset_flags({alpha_, beta_}, FlagSelect::None);
        if (flags[0].accessed_was_set && flags[1].accessed_was_set) {
            detections_.push_back(now);
            mv.log_detection(1, detections_.size());
            state_ = State::Settling;
            return now + settle_;
        }
        return now + period_;
    }
    // Settled: the victim has left both pages; flush translations and
    // re-arm the flags.
    mv.ipi_shootdown();
    mv.read_and_reset_flags({alpha_, beta_}, FlagSelect::Accessed);
    state_ = State::WaitBoth;
    return now + period_;
}

std::vector<Cycle> TspmAttack::durations() const {
    std::vector<Cycle> out;
    for (std::size_t i = 1; i < detections_.size(); ++i)
        out.push_back(detections_[i] - detections_[i - 1]);
    return out;
}

Cycle TspmAttack::split_threshold(std::vector<Cycle> values) {
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    if (values.size() < 2) return values.empty() ? 0 : values[0];
    Cycle best_gap = 0;
    Cycle thr = values[0];
    for (std::size_t i = 1; i < values.size(); ++i) {
        const Cycle gap = values[i] - values[i - 1];
        if (gap > best_gap) {
            best_gap = gap;
            thr = values[i - 1] + gap / 2;
        }
    }
    return thr;
}

std::string TspmAttack::classify_intervals() const {
    const std::vector<Cycle> d = durations();
    if (d.empty()) return {};
    const Cycle thr = split_threshold(d);
    std::string out;
    for (Cycle v : d) out.push_back(v <= thr ? '0' : '1');
    return out;
}

// ---------------------------------------------------------------------------
// HT-SPM

void HtSpmAttack::attach(MachineView& mv, const VictimLayoutInfo&) {
    // Cleaner working set: contiguous pages covering every dTLB and L2 TLB
    // set with a full complement of ways, walked on the victim's physical
    // core. 1536 contiguous pages cover the L2 (128x12) and give each of
    // the 16 dTLB sets 96 conflicting translations.
    const TlbConfig& tlb = mv.config().tlb;
    const std::uint64_t pages =
        std::max<std::uint64_t>(tlb.l2.entries(), tlb.dtlb.entries());
    const std::uint64_t base_vpn = 0x40000;
    for (std::uint64_t i = 0; i < pages; ++i) {
        mv.map_own_page(base_vpn + i);
        cleaner_vas_.push_back((base_vpn + i) << kPageShift);
    }
    auto all = monitored_;
    all.push_back(trigger_);
    mv.read_and_reset_flags(all, FlagSelect::Both);
    next_clean_ = clean_period_;
    next_collect_ = collect_period_;
}

Cycle HtSpmAttack::first_wake() const { return std::min(clean_period_, collect_period_); }

void HtSpmAttack::clean(MachineView& mv) {
    for (VirtAddr va : cleaner_vas_) mv.touch(va, AccessKind::DataRead);
}

void HtSpmAttack::collect(MachineView& mv) {
    const auto trig = mv.read_and_reset_flags({trigger_}, FlagSelect::Accessed);
    if (trig[0].accessed_was_set) {
        if (in_word_) {
            std::sort(current_.begin(), current_.end());
            current_.erase(std::unique(current_.begin(), current_.end()), current_.end());
            sets_.push_back(current_);
            mv.log_detection(2, current_.size());
        }
        current_.clear();
        in_word_ = true;
    }
    const auto flags = mv.read_and_reset_flags(monitored_, FlagSelect::Accessed);
    for (const auto& f : flags)
        if (f.accessed_was_set && in_word_) current_.push_back(f.vpn);
}

Cycle HtSpmAttack::wake(MachineView& mv, Cycle now) {
    if (now >= next_collect_) {
        collect(mv);
        next_collect_ += collect_period_;
    }
    if (now >= next_clean_) {
        clean(mv);
        next_clean_ += clean_period_;
    }
    return std::min(next_clean_, next_collect_);
}

std::vector<std::vector<std::uint64_t>> HtSpmAttack::word_sets() const {
    auto out = sets_;
    if (in_word_ && !current_.empty()) {
        auto last = current_;
        std::sort(last.begin(), last.end());
        last.erase(std::unique(last.begin(), last.end()), last.end());
        out.push_back(std::move(last));
    }
    return out;
}

}  // namespace encsim
