#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace encsim {

// All simulated time is logical CPU cycles; there is no wall clock.
using Cycle = std::uint64_t;

using VirtAddr = std::uint64_t;
using PhysAddr = std::uint64_t;

inline constexpr unsigned kPageShift = 12;      // 4KB pages
inline constexpr std::uint64_t kPageSize = 1ull << kPageShift;
inline constexpr unsigned kLineShift = 6;       // 64B cache lines
inline constexpr std::uint64_t kLineSize = 1ull << kLineShift;

constexpr std::uint64_t page_number(std::uint64_t addr) { return addr >> kPageShift; }
constexpr std::uint64_t page_offset(std::uint64_t addr) { return addr & (kPageSize - 1); }
constexpr std::uint64_t line_address(PhysAddr pa) { return pa & ~(kLineSize - 1); }

enum class AccessKind : std::uint8_t {
    CodeFetch,
    DataRead,
    DataWrite,
};

inline const char* to_string(AccessKind k) {
    switch (k) {
        case AccessKind::CodeFetch: return "code-fetch";
        case AccessKind::DataRead: return "data-read";
        case AccessKind::DataWrite: return "data-write";
    }
    return "?";
}

enum class ActorKind : std::uint8_t { Victim, Attacker };

// One schedulable entity on the shared timeline. Exactly one victim (id 0)
// per scenario; attackers get ids 1..n. `colocated` marks an attacker that
// runs on the victim's physical core (HyperThreading sibling).
struct Actor {
    int id = 0;
    ActorKind kind = ActorKind::Victim;
    int core = 0;
    bool colocated = false;
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SimError : std::runtime_error {
    explicit SimError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace encsim
