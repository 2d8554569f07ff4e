#include "encsim/event_log.hpp"

#include <ostream>

namespace encsim {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Access: return "access";
        case EventKind::TlbHit: return "tlb-hit";
        case EventKind::TlbMiss: return "tlb-miss";
        case EventKind::PageWalk: return "page-walk";
        case EventKind::PageFault: return "page-fault";
        case EventKind::Aex: return "aex";
        case EventKind::TlbFlush: return "tlb-flush";
        case EventKind::CacheMiss: return "cache-miss";
        case EventKind::DramAccess: return "dram";
        case EventKind::Probe: return "probe";
        case EventKind::Detection: return "detect";
        case EventKind::Marker: return "marker";
    }
    return "?";
}

void EventLog::serialize(std::ostream& os) const {
    for (const Event& e : events_) {
        os << e.cycle << ' ' << e.actor << ' ' << to_string(e.kind) << ' ' << e.a << ' ' << e.b
           << '\n';
    }
}

}  // namespace encsim
