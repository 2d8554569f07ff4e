#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "encsim/types.hpp"

namespace encsim {

enum class EventKind : std::uint8_t {
    Access,        // a: virtual address, b: latency
    TlbHit,        // a: vpn, b: level (0 = L1, 1 = L2)
    TlbMiss,       // a: vpn
    PageWalk,      // a: vpn, b: 1 if accessed flag transitioned 0->1
    PageFault,     // a: vpn, b: access kind
    Aex,           // a: reason, b: cost
    TlbFlush,      // a: scope (0 = all, 1 = pcid), b: pcid
    CacheMiss,     // a: line address, b: deepest miss level (2 = missed LLC)
    DramAccess,    // a: row, b: 1 = row hit, 0 = conflict
    Probe,         // a: strategy-specific slot, b: measured value
    Detection,     // a: strategy-specific slot, b: value
    Marker,        // a: victim-defined marker id, b: payload
};

const char* to_string(EventKind k);

enum class AexReason : std::uint8_t { PageFault = 0, IpiShootdown = 1, Other = 2 };

struct Event {
    Cycle cycle;
    std::int32_t actor;
    EventKind kind;
    std::uint64_t a;
    std::uint64_t b;
};

// Append-only trace ordered by (cycle, actor) in execution order; the engine
// only appends from the single scenario timeline so no sorting happens here.
class EventLog {
public:
    void configure(bool enabled, bool access_events) {
        enabled_ = enabled;
        access_events_ = access_events;
    }

    void append(Cycle cycle, int actor, EventKind kind, std::uint64_t a, std::uint64_t b) {
        if (!enabled_) return;
        if (kind == EventKind::Access && !access_events_) return;
        events_.push_back(Event{cycle, actor, kind, a, b});
    }

    const std::vector<Event>& events() const { return events_; }
    std::size_t size() const { return events_.size(); }
    void clear() { events_.clear(); }

    // One line per event; byte-stable for determinism comparisons.
    void serialize(std::ostream& os) const;

private:
    std::vector<Event> events_;
    bool enabled_ = true;
    bool access_events_ = true;
};

}  // namespace encsim
