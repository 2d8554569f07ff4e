#include "encsim/metrics.hpp"

#include <algorithm>
#include <sstream>

namespace encsim {

const char* vector_label(AttackVectorId v) {
    switch (v) {
        case AttackVectorId::L1PrimeProbe: return "i/dCache Prime+Probe";
        case AttackVectorId::L2PrimeProbe: return "L2 Cache Prime+Probe";
        case AttackVectorId::L3PrimeProbe: return "L3 Cache Prime+Probe";
        case AttackVectorId::PageFault: return "page faults";
        case AttackVectorId::BSpm: return "B/T-SPM";
        case AttackVectorId::TSpm: return "T-SPM";
        case AttackVectorId::HtSpm: return "HT-SPM";
        case AttackVectorId::CrossEnclaveDrama: return "cross-enclave DRAMA";
        case AttackVectorId::CacheDram: return "cache-DRAM";
    }
    return "?";
}

std::uint64_t spatial_accuracy_bytes(AttackVectorId v, const SimConfig& cfg) {
    const std::uint64_t prm = cfg.prm.size;
    switch (v) {
        case AttackVectorId::L1PrimeProbe: return prm / cfg.cache.l1.sets;
        case AttackVectorId::L2PrimeProbe: return prm / cfg.cache.l2.sets;
        case AttackVectorId::L3PrimeProbe: return prm / cfg.cache.l3.sets;
        case AttackVectorId::PageFault:
        case AttackVectorId::BSpm:
        case AttackVectorId::TSpm:
        case AttackVectorId::HtSpm:
            return kPageSize;
        case AttackVectorId::CrossEnclaveDrama:
            // One page's chunk of an 8KB row (a page spreads over
            // row_bytes / page_size rows, twice that many chunks).
            return cfg.dram.row_bytes / 8;
        case AttackVectorId::CacheDram: return cfg.cache.line_size;
    }
    throw SimError("unknown attack vector");
}

std::string human_bytes(std::uint64_t bytes) {
    std::ostringstream os;
    if (bytes >= (1ull << 20) && bytes % (1ull << 20) == 0)
        os << (bytes >> 20) << "MB";
    else if (bytes >= (1ull << 10) && bytes % (1ull << 10) == 0)
        os << (bytes >> 10) << "KB";
    else
        os << bytes << "B";
    return os.str();
}

std::vector<GranularityRow> granularity_table(const SimConfig& cfg) {
    static constexpr AttackVectorId order[] = {
        AttackVectorId::L1PrimeProbe,   AttackVectorId::L2PrimeProbe,
        AttackVectorId::L3PrimeProbe,   AttackVectorId::PageFault,
        AttackVectorId::BSpm,           AttackVectorId::HtSpm,
        AttackVectorId::CrossEnclaveDrama, AttackVectorId::CacheDram,
    };
    std::vector<GranularityRow> rows;
    for (AttackVectorId v : order) {
        const std::uint64_t b = spatial_accuracy_bytes(v, cfg);
        rows.push_back(GranularityRow{vector_label(v), b, human_bytes(b)});
    }
    return rows;
}

// ---------------------------------------------------------------------------

namespace {

std::string pf_signature(const std::vector<std::uint64_t>& pages) {
    // Ordered page-entry sequence with adjacent repeats merged (a fault can
    // only observe transitions).
    std::ostringstream os;
    std::uint64_t prev = ~0ull;
    for (std::uint64_t p : pages) {
        if (p == prev) continue;
        os << p << ",";
        prev = p;
    }
    return os.str();
}

std::string set_signature(const std::vector<std::uint64_t>& pages) {
    std::vector<std::uint64_t> s = pages;
    std::sort(s.begin(), s.end());
    s.erase(std::unique(s.begin(), s.end()), s.end());
    std::ostringstream os;
    for (std::uint64_t p : s) os << p << ",";
    return os.str();
}

}  // namespace

SignaturePartition signature_partition(const DictionaryLayout& dict, ChannelModel channel) {
    SignaturePartition part;
    for (std::size_t i = 0; i < dict.word_pages.size(); ++i) {
        const std::string sig = channel == ChannelModel::PageFaultSequence
                                    ? pf_signature(dict.word_pages[i])
                                    : set_signature(dict.word_pages[i]);
        part.groups[sig].push_back(i);
    }
    return part;
}

std::map<std::size_t, std::size_t> SignaturePartition::size_histogram() const {
    std::map<std::size_t, std::size_t> h;
    for (const auto& [sig, members] : groups) ++h[members.size()];
    return h;
}

std::size_t SignaturePartition::unique_count() const {
    std::size_t n = 0;
    for (const auto& [sig, members] : groups)
        if (members.size() == 1) ++n;
    return n;
}

bool refines(const SignaturePartition& fine, const SignaturePartition& coarse) {
    std::map<std::size_t, const std::string*> owner;
    for (const auto& [sig, members] : coarse.groups)
        for (std::size_t w : members) owner[w] = &sig;
    for (const auto& [sig, members] : fine.groups) {
        const std::string* first = nullptr;
        for (std::size_t w : members) {
            auto it = owner.find(w);
            if (it == owner.end()) return false;
            if (!first) first = it->second;
            else if (*first != *it->second) return false;
        }
    }
    return true;
}

// ---------------------------------------------------------------------------

double bit_error_rate(const std::string& recovered, const std::string& truth) {
    if (recovered.size() != truth.size())
        throw SimError("bit_error_rate: length mismatch (" + std::to_string(recovered.size()) +
                       " vs " + std::to_string(truth.size()) + ")");
    if (truth.empty()) return 0.0;
    std::size_t errors = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) errors += recovered[i] != truth[i];
    return static_cast<double>(errors) / static_cast<double>(truth.size());
}

std::string aex_band(std::uint64_t aex) {
    if (aex == 0) return "none";
    return aex < 50000 ? "modest" : "high";
}

std::string slowdown_band(double slowdown) {
    if (slowdown < 1.05) return "minimal";
    return slowdown < 2.0 ? "modest" : "high";
}

void fill_side_effects(AttackReport& r, const SimResult& sim) {
    r.aex_count = sim.aex_count;
    r.baseline_aex_count = sim.baseline_aex_count;
    r.slowdown = sim.slowdown;
    r.aex_band = aex_band(sim.aex_count - sim.baseline_aex_count);
    r.slowdown_band = slowdown_band(sim.slowdown);
}

}  // namespace encsim
