#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "encsim/engine.hpp"
#include "encsim/machine.hpp"

namespace encsim {

inline constexpr Cycle kNeverWake = ~Cycle{0} / 2;

// The adversary-facing surface of the machine: own memory accesses, page
// table manipulation of the victim, IPIs and cache line flushes. There is
// deliberately no path from here to victim ground truth.
class MachineView {
public:
    MachineView(Machine& m, int actor) : m_(m), actor_(actor) {}

    Cycle now() const { return m_.now(); }
    const SimConfig& config() const { return m_.config(); }
    SeededRng& rng() { return m_.rng(); }
    int actor() const { return actor_; }

    // Own memory.
    AccessOutcome touch(VirtAddr va, AccessKind kind = AccessKind::DataRead) {
        return m_.access(actor_, va, kind);
    }
    void map_own_page(std::uint64_t vpn) { m_.alloc_outside_page(actor_, vpn); }
    void map_own_page_at(std::uint64_t vpn, std::uint64_t ppn) {
        m_.map_page_at(actor_, vpn, ppn);
    }
    void map_own_enclave_page(std::uint64_t vpn) { m_.alloc_enclave_page(actor_, vpn); }
    void define_own_elrange(VirtAddr base, std::uint64_t len) {
        m_.define_elrange(actor_, base, len);
    }
    bool ppn_free(std::uint64_t ppn) const { return m_.ppn_free(ppn); }
    PhysAddr resolve_own(VirtAddr va) const { return m_.resolve(actor_, va); }

    // OS-level view of the victim's translation state.
    PhysAddr resolve_victim(VirtAddr va) const { return m_.resolve(0, va); }
    std::vector<FlagReadout> read_and_reset_flags(const std::vector<std::uint64_t>& pages,
                                                  FlagSelect which) {
        return m_.read_and_reset_flags(0, pages, which);
    }
    void set_pte_trap(std::uint64_t vpn, PteTrap trap) { m_.set_pte_trap(0, vpn, trap); }
    void clear_pte_traps(std::uint64_t vpn) { m_.clear_pte_traps(0, vpn); }

    // Inter-processor interrupt: forces a victim AEX (TLB shootdown).
    // Returns the cost charged to the victim by the engine.
    Cycle ipi_shootdown();

    void flush_line(PhysAddr pa) { m_.flush_cache_line(pa); }

    void log_probe(std::uint64_t slot, std::uint64_t value) {
        m_.log().append(m_.now(), actor_, EventKind::Probe, slot, value);
    }
    void log_detection(std::uint64_t slot, std::uint64_t value) {
        m_.log().append(m_.now(), actor_, EventKind::Detection, slot, value);
    }

private:
    friend struct EngineRun;
    Machine& m_;
    int actor_;
    // Set by the engine so shootdowns suspend the victim.
    std::function<Cycle()> shootdown_hook_;
};

// Jittered, occasionally stale cycle counter smuggled into an attack
// enclave through shared memory.
class SmuggledClock {
public:
    SmuggledClock(double sigma, double stale_prob) : sigma_(sigma), stale_prob_(stale_prob) {}

    Cycle read(Cycle true_cycle, SeededRng& rng) {
        if (has_last_ && rng.bernoulli(stale_prob_)) return last_;
        double jitter = rng.gaussian(sigma_);
        const double cap = 3.0 * sigma_;
        if (jitter > cap) jitter = cap;
        if (jitter < -cap) jitter = -cap;
        std::int64_t v = static_cast<std::int64_t>(true_cycle) +
                         static_cast<std::int64_t>(std::llround(jitter));
        if (v < 0) v = 0;
        last_ = static_cast<Cycle>(v);
        has_last_ = true;
        return last_;
    }

private:
    double sigma_;
    double stale_prob_;
    Cycle last_ = 0;
    bool has_last_ = false;
};

class AttackStrategy {
public:
    virtual ~AttackStrategy() = default;
    virtual std::string name() const = 0;
    virtual bool needs_colocation() const { return false; }
    virtual bool needs_enclave_memory() const { return false; }
    virtual void attach(MachineView& mv, const VictimLayoutInfo& info) = 0;
    virtual Cycle first_wake() const { return kNeverWake; }
    // Perform one action at `now`; return the next wake cycle (> now).
    virtual Cycle wake(MachineView& mv, Cycle now) { return kNeverWake; }
    virtual void on_victim_fault(MachineView& mv, std::uint64_t vpn, AccessKind kind) {}
    // How long probing continues past victim completion, so trailing
    // observations (the last timing interval, the final probe round) land.
    virtual Cycle drain_window() const { return 0; }
};

// ---------------------------------------------------------------------------
// Page-fault (controlled-channel) attack: monitored pages are kept
// non-present; each fault reveals one page entry, the handler un-traps the
// faulting page and re-traps the previously visited one.
class PageFaultAttack : public AttackStrategy {
public:
    explicit PageFaultAttack(std::vector<std::uint64_t> monitored_vpns)
        : monitored_(std::move(monitored_vpns)) {}
    std::string name() const override { return "page-fault"; }
    void attach(MachineView& mv, const VictimLayoutInfo& info) override;
    void on_victim_fault(MachineView& mv, std::uint64_t vpn, AccessKind kind) override;

    const std::vector<std::uint64_t>& fault_trace() const { return trace_; }
    // Visit-count recovery: split the trace on the delimiter page, map each
    // segment's length to the nearer of count0/count1.
    std::string recover_bits(std::uint64_t delimiter_vpn, std::size_t count0,
                             std::size_t count1) const;

private:
    std::vector<std::uint64_t> monitored_;
    std::vector<std::uint64_t> trace_;
    std::optional<std::uint64_t> untrapped_;
};

// ---------------------------------------------------------------------------
// B-SPM: inspect the trigger page's accessed flag at a fixed rate; on every
// detection fire one TLB shootdown and collect the accessed page set.
class BspmAttack : public AttackStrategy {
public:
    BspmAttack(std::vector<std::uint64_t> monitored_vpns, std::uint64_t trigger_vpn,
               Cycle inspection_period)
        : monitored_(std::move(monitored_vpns)),
          trigger_(trigger_vpn),
          period_(inspection_period) {}
    std::string name() const override { return "b-spm"; }
    void attach(MachineView& mv, const VictimLayoutInfo& info) override;
    Cycle first_wake() const override { return period_; }
    Cycle wake(MachineView& mv, Cycle now) override;
    Cycle drain_window() const override { return 2 * period_; }

    struct Inspection {
        Cycle cycle;
        std::vector<std::uint64_t> pages;  // accessed since the last reset
    };
    const std::vector<Inspection>& trace() const { return trace_; }

    // EdDSA recovery: count inspections between sightings of the delimiter
    // page; two duration clusters map to bit values.
    std::string recover_bits_by_segments(std::uint64_t delimiter_vpn) const;
    // Hunspell recovery: each detection closes one lookup's page set.
    std::vector<std::vector<std::uint64_t>> recover_page_sets() const;

private:
    std::vector<std::uint64_t> monitored_;
    std::uint64_t trigger_;
    Cycle period_;
    std::vector<Inspection> trace_;
};

// ---------------------------------------------------------------------------
// T-SPM: watch the accessed flags of alpha and beta; when both are set,
// record the time, wait for the victim to leave, then shoot down the TLB
// and reset the flags. Inter-detection durations carry the secret.
class TspmAttack : public AttackStrategy {
public:
    TspmAttack(std::uint64_t alpha_vpn, std::uint64_t beta_vpn, Cycle inspection_period,
               Cycle settle_delay)
        : alpha_(alpha_vpn), beta_(beta_vpn), period_(inspection_period),
          settle_(settle_delay) {}
    std::string name() const override { return "t-spm"; }
    void attach(MachineView& mv, const VictimLayoutInfo& info) override;
    Cycle first_wake() const override { return period_; }
    Cycle wake(MachineView& mv, Cycle now) override;
    Cycle drain_window() const override { return 2 * period_ + settle_; }

    const std::vector<Cycle>& detection_cycles() const { return detections_; }
    std::vector<Cycle> durations() const;
    // Threshold classification at the midpoint of the two duration
    // clusters; returns one symbol per interval ('0' low, '1' high).
    std::string classify_intervals() const;
    static Cycle split_threshold(std::vector<Cycle> values);

private:
    enum class State { WaitBoth, Settling };
    std::uint64_t alpha_, beta_;
    Cycle period_, settle_;
    State state_ = State::WaitBoth;
    std::vector<Cycle> detections_;
};

// ---------------------------------------------------------------------------
// HT-SPM: colocated cleaner threads walk dTLB/L2 eviction sets on the
// victim's physical core while collectors inspect accessed flags; zero AEX.
class HtSpmAttack : public AttackStrategy {
public:
    HtSpmAttack(std::vector<std::uint64_t> monitored_vpns, std::uint64_t trigger_vpn,
                Cycle clean_period, Cycle collect_period)
        : monitored_(std::move(monitored_vpns)),
          trigger_(trigger_vpn),
          clean_period_(clean_period),
          collect_period_(collect_period) {}
    std::string name() const override { return "ht-spm"; }
    bool needs_colocation() const override { return true; }
    void attach(MachineView& mv, const VictimLayoutInfo& info) override;
    Cycle first_wake() const override;
    Cycle wake(MachineView& mv, Cycle now) override;
    Cycle drain_window() const override { return 2 * collect_period_; }

    // One page set per detected lookup (includes the still-open trailing set).
    std::vector<std::vector<std::uint64_t>> word_sets() const;

private:
    void clean(MachineView& mv);
    void collect(MachineView& mv);

    std::vector<std::uint64_t> monitored_;
    std::uint64_t trigger_;
    Cycle clean_period_, collect_period_;
    Cycle next_clean_ = 0, next_collect_ = 0;
    std::vector<VirtAddr> cleaner_vas_;
    bool in_word_ = false;
    std::vector<std::uint64_t> current_;
    std::vector<std::vector<std::uint64_t>> sets_;
};

// ---------------------------------------------------------------------------
// Cross-enclave LLC Prime+Probe on two code addresses (square / multiply).
class PrimeProbeAttack : public AttackStrategy {
public:
    PrimeProbeAttack(VirtAddr square_va, VirtAddr multiply_va, Cycle period)
        : square_va_(square_va), multiply_va_(multiply_va), period_(period) {}
    std::string name() const override { return "prime-probe"; }
    void attach(MachineView& mv, const VictimLayoutInfo& info) override;
    Cycle first_wake() const override { return period_; }
    Cycle wake(MachineView& mv, Cycle now) override;
    Cycle drain_window() const override { return 3 * period_; }

    struct Round {
        Cycle cycle;
        std::uint32_t square_misses;
        std::uint32_t multiply_misses;
    };
    const std::vector<Round>& rounds() const { return rounds_; }
    std::string recover_bits() const;

private:
    std::uint32_t probe(MachineView& mv, const std::vector<VirtAddr>& lines);

    VirtAddr square_va_, multiply_va_;
    Cycle period_;
    std::vector<VirtAddr> square_lines_, multiply_lines_;
    std::vector<Round> rounds_;
};

// ---------------------------------------------------------------------------
// Cross-enclave DRAMA: alternate p' and p on the target's bank, classify
// p's latency (smuggled clock) as row hit or conflict.
class DramaAttack : public AttackStrategy {
public:
    DramaAttack(VirtAddr victim_target_va, Cycle period, Cycle dwell)
        : target_va_(victim_target_va), period_(period), dwell_(dwell) {}
    std::string name() const override { return "drama"; }
    bool needs_enclave_memory() const override { return true; }
    void attach(MachineView& mv, const VictimLayoutInfo& info) override;
    Cycle first_wake() const override { return period_; }
    Cycle wake(MachineView& mv, Cycle now) override;

    struct Measure {
        Cycle cycle;     // when p was measured
        Cycle window;    // length of the listening window before the measure
        Cycle latency;   // observed through the smuggled clock
        bool true_hit;   // actual row state; test oracle only, never used by recovery
    };
    const std::vector<Measure>& measures() const { return measures_; }
    // Midpoint threshold between the two latency modes.
    Cycle calibrate_threshold() const;
    std::vector<bool> classify_hits() const;  // true = row hit
    PhysAddr p() const { return p_; }
    PhysAddr p_prime() const { return p_prime_; }

private:
    VirtAddr target_va_;
    Cycle period_, dwell_;
    PhysAddr p_ = 0, p_prime_ = 0;
    VirtAddr p_va_ = 0, p_prime_va_ = 0;
    bool primed_ = false;
    Cycle primed_at_ = 0;
    std::unique_ptr<SmuggledClock> clock_;
    std::vector<Measure> measures_;
};

// ---------------------------------------------------------------------------
// LLC leg of the cache-DRAM attack: keeps the target's cache set primed so
// victim references to it reach DRAM.
class LlcPinAttack : public AttackStrategy {
public:
    LlcPinAttack(VirtAddr victim_target_va, Cycle period)
        : target_va_(victim_target_va), period_(period) {}
    std::string name() const override { return "llc-pin"; }
    void attach(MachineView& mv, const VictimLayoutInfo& info) override;
    Cycle first_wake() const override { return 0; }
    Cycle wake(MachineView& mv, Cycle now) override;

    std::uint64_t probe_miss_total() const { return miss_total_; }

private:
    VirtAddr target_va_;
    Cycle period_;
    std::vector<VirtAddr> lines_;
    std::uint64_t miss_total_ = 0;
};

// ---------------------------------------------------------------------------
// TLB probing from a HyperThreading sibling: per round, walk one eviction
// set per dTLB set and report the self-miss counts.
class TlbProbeAttack : public AttackStrategy {
public:
    explicit TlbProbeAttack(Cycle period) : period_(period) {}
    std::string name() const override { return "tlb-probe"; }
    bool needs_colocation() const override { return true; }
    void attach(MachineView& mv, const VictimLayoutInfo& info) override;
    Cycle first_wake() const override { return period_; }
    Cycle wake(MachineView& mv, Cycle now) override;
    Cycle drain_window() const override { return 2 * period_; }

    struct Round {
        Cycle cycle;
        std::vector<std::uint32_t> misses;  // per dTLB set
    };
    const std::vector<Round>& rounds() const { return rounds_; }
    // Concatenated per-round active-set signature for classification.
    std::string signature() const;

private:
    Cycle period_;
    std::uint32_t sets_ = 0;
    std::vector<std::vector<VirtAddr>> eviction_vas_;  // per set
    std::vector<Round> rounds_;
};

// ---------------------------------------------------------------------------
// Nearest-centroid classifier over timing vectors (stands in for the
// paper's Random Forest on separable synthetic timings).
class NearestCentroid {
public:
    void fit(const std::vector<std::vector<double>>& samples, const std::vector<int>& labels);
    int predict(const std::vector<double>& sample) const;

private:
    std::vector<std::vector<double>> centroids_;
    std::vector<int> labels_;
};

}  // namespace encsim
