#include "encsim/engine.hpp"

#include <algorithm>
#include <sstream>

#include "encsim/attack.hpp"

namespace encsim {

Cycle MachineView::ipi_shootdown() {
    if (!shootdown_hook_) throw SimError("shootdown outside an engine run");
    return shootdown_hook_();
}

namespace {

constexpr int kMaxFaultRetries = 64;

}  // namespace

struct EngineRun {
    Machine machine;
    const VictimProgram& victim;
    std::vector<AttackStrategy*> strategies;
    std::vector<std::unique_ptr<MachineView>> views;
    Cycle victim_ready = 0;
    bool draining_ = false;
    RunStats stats;

    EngineRun(const SimConfig& cfg, const VictimProgram& v,
              const std::vector<AttackStrategy*>& attackers, std::uint64_t machine_seed)
        : machine(cfg, make_actors(v, attackers), machine_seed), victim(v),
          strategies(attackers) {
        if (victim.steps.empty()) throw SimError("victim program is empty");

        // Victim pages map into the PRM in vpn order, so layouts are
        // reproducible for a fixed seed.
        const std::uint64_t lo = victim.vpns.front();
        const std::uint64_t hi = victim.vpns.back();
        machine.define_elrange(0, lo << kPageShift, (hi - lo + 1) << kPageShift);
        for (std::uint64_t vpn : victim.vpns) machine.alloc_enclave_page(0, vpn);

        VictimLayoutInfo info{victim.name, victim.pages, victim.vpns, victim.period};
        for (std::size_t i = 0; i < strategies.size(); ++i) {
            auto view = std::make_unique<MachineView>(machine, static_cast<int>(i + 1));
            view->shootdown_hook_ = [this] { return this->shootdown(); };
            if (strategies[i]->needs_colocation() &&
                !machine.config().tlb.shared_across_logical_cores)
                throw SimError(strategies[i]->name() +
                               ": HyperThreading TLB sharing is disabled");
            if (strategies[i]->needs_enclave_memory()) {
                // A standard attacker-enclave ELRANGE well away from the
                // victim's; pages are assigned explicitly by the strategy.
                const VirtAddr base = 0x1000000ull * (i + 2);
                view->define_own_elrange(base << kPageShift, 1ull << 30);
            }
            strategies[i]->attach(*view, info);
            views.push_back(std::move(view));
        }
    }

    static std::vector<Actor> make_actors(const VictimProgram&,
                                          const std::vector<AttackStrategy*>& attackers) {
        std::vector<Actor> actors;
        actors.push_back(Actor{0, ActorKind::Victim, 0, false});
        int next_core = 1;
        for (std::size_t i = 0; i < attackers.size(); ++i) {
            Actor a;
            a.id = static_cast<int>(i + 1);
            a.kind = ActorKind::Attacker;
            a.colocated = attackers[i]->needs_colocation();
            a.core = a.colocated ? 0 : next_core++;
            actors.push_back(a);
        }
        return actors;
    }

    Cycle shootdown() {
        const Cycle cost = machine.aex(AexReason::IpiShootdown);
        if (!draining_) {
            victim_ready += cost;
            stats.aex_cost_sum += cost;
        }
        return cost;
    }

    void run() {
        std::vector<Cycle> wakes(strategies.size());
        for (std::size_t i = 0; i < strategies.size(); ++i) wakes[i] = strategies[i]->first_wake();
        const Cycle bg_period = machine.config().mem.background_interrupt_period;
        Cycle next_bg = bg_period ? bg_period : kNeverWake;

        std::size_t step_idx = 0;
        int fault_retries = 0;
        while (step_idx < victim.steps.size()) {
            // Globally next actor; the victim (actor 0) wins ties.
            Cycle t = victim_ready;
            int who = -1;  // -1 victim, -2 background, else strategy index
            for (std::size_t i = 0; i < strategies.size(); ++i) {
                if (wakes[i] < t) {
                    t = wakes[i];
                    who = static_cast<int>(i);
                }
            }
            if (next_bg < t) {
                t = next_bg;
                who = -2;
            }

            machine.set_now(t);
            if (who == -1) {
                if (execute_victim_step(victim.steps[step_idx])) {
                    ++step_idx;
                    fault_retries = 0;
                } else if (++fault_retries > kMaxFaultRetries) {
                    throw SimError("victim access faults without progress");
                }
            } else if (who == -2) {
                const Cycle cost = machine.aex(AexReason::Other);
                victim_ready += cost;
                stats.aex_cost_sum += cost;
                next_bg += bg_period;
            } else {
                const Cycle next = strategies[who]->wake(*views[who], t);
                if (next <= t) throw SimError("strategy did not advance its wake time");
                wakes[who] = next;
            }
        }
        stats.completion = victim_ready;
        // Drain: strategies keep probing briefly past victim completion so
        // trailing observations are collected.
        draining_ = true;
        Cycle drain = 0;
        for (const AttackStrategy* s : strategies)
            drain = std::max(drain, s->drain_window());
        while (true) {
            Cycle t = kNeverWake;
            int who = -1;
            for (std::size_t i = 0; i < strategies.size(); ++i) {
                if (wakes[i] < t) {
                    t = wakes[i];
                    who = static_cast<int>(i);
                }
            }
            if (who < 0 || t > stats.completion + drain) break;
            machine.set_now(t);
            const Cycle next = strategies[who]->wake(*views[who], t);
            if (next <= t) throw SimError("strategy did not advance its wake time");
            wakes[who] = next;
        }
        stats.aex_count = machine.aex_count();
    }

    // Returns false when the step must be retried (page fault path).
    bool execute_victim_step(const Step& s) {
        switch (s.kind) {
            case StepKind::Access: {
                const AccessOutcome out = machine.access(0, s.va, s.access);
                stats.access_latency_sum += out.latency;
                stats.aex_cost_sum += out.aex_cost;
                victim_ready += out.latency + out.aex_cost;
                if (out.faulted) {
                    machine.set_now(victim_ready);
                    for (std::size_t i = 0; i < strategies.size(); ++i)
                        strategies[i]->on_victim_fault(*views[i], out.vpn, s.access);
                    return false;
                }
                ++stats.victim_accesses;
                return true;
            }
            case StepKind::Compute:
                stats.compute_sum += s.cost;
                victim_ready += s.cost;
                return true;
            case StepKind::WaitPeriod: {
                const Cycle target = s.value * victim.period;
                if (target > victim_ready) {
                    stats.idle_slack_sum += target - victim_ready;
                    victim_ready = target;
                }
                return true;
            }
            case StepKind::Marker:
                machine.log().append(victim_ready, 0, EventKind::Marker, s.marker, s.value);
                return true;
            case StepKind::FlushLine:
                machine.flush_cache_line(machine.resolve(0, s.va));
                return true;
        }
        return true;
    }
};

SimResult run_scenario(const SimConfig& cfg, const VictimProgram& victim,
                       const std::vector<AttackStrategy*>& attackers, std::uint64_t seed) {
    cfg.validate();
    const std::uint64_t machine_seed = mix_seed(seed, 2);

    SimResult result;
    {
        EngineRun baseline(cfg, victim, {}, machine_seed);
        baseline.run();
        result.baseline = baseline.stats;
        result.baseline_cycles = baseline.stats.completion;
        result.baseline_aex_count = baseline.machine.aex_count();
    }
    {
        EngineRun attacked(cfg, victim, attackers, machine_seed);
        attacked.run();
        result.attacked = attacked.stats;
        result.attacked_cycles = attacked.stats.completion;
        result.aex_count = attacked.machine.aex_count();
        const std::size_t n = attackers.size() + 1;
        result.counters.reserve(n);
        for (std::size_t i = 0; i < n; ++i)
            result.counters.push_back(attacked.machine.counters(static_cast<int>(i)));
        result.event_count = attacked.machine.log().size();
        if (cfg.log.enabled) {
            std::ostringstream os;
            attacked.machine.log().serialize(os);
            result.event_log_text = os.str();
        }
    }
    result.slowdown = result.baseline_cycles == 0
                          ? 1.0
                          : static_cast<double>(result.attacked_cycles) /
                                static_cast<double>(result.baseline_cycles);
    return result;
}

}  // namespace encsim
