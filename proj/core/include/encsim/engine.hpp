#pragma once

#include <memory>
#include <string>
#include <vector>

#include "encsim/machine.hpp"
#include "encsim/victim.hpp"

namespace encsim {

class AttackStrategy;

// Victim layout knowledge handed to strategies: the adversary knows the
// binary and its mapping but never the secret (GroundTruth stays behind).
struct VictimLayoutInfo {
    std::string name;
    std::map<std::string, std::uint64_t> pages;
    std::vector<std::uint64_t> vpns;
    Cycle period = 0;
};

struct RunStats {
    Cycle completion = 0;  // cycle at which the victim's last step finished
    Cycle access_latency_sum = 0;
    Cycle compute_sum = 0;
    Cycle aex_cost_sum = 0;
    Cycle idle_slack_sum = 0;
    std::uint64_t aex_count = 0;
    std::uint64_t victim_accesses = 0;
};

struct SimResult {
    Cycle baseline_cycles = 0;  // attacker-free companion run
    Cycle attacked_cycles = 0;
    std::uint64_t aex_count = 0;           // attacked run
    std::uint64_t baseline_aex_count = 0;  // background interrupts only
    double slowdown = 1.0;
    RunStats baseline;
    RunStats attacked;
    std::vector<ActorCounters> counters;  // attacked run, per actor
    std::uint64_t event_count = 0;
    std::string event_log_text;  // attacked run, empty when logging disabled
};

// Runs the attacker-free baseline and then the attacked scenario on fresh
// machines seeded from `seed`. Strategies are caller-owned; after the call
// they hold their observation traces for recovery.
SimResult run_scenario(const SimConfig& cfg, const VictimProgram& victim,
                       const std::vector<AttackStrategy*>& attackers, std::uint64_t seed);

}  // namespace encsim
