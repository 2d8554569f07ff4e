#include "encsim/config.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <nlohmann/json.hpp>

namespace encsim {
namespace {

bool pow2(std::uint64_t v) { return v != 0 && std::has_single_bit(v); }

void require(bool cond, const std::string& msg) {
    if (!cond) throw ConfigError(msg);
}

std::uint64_t parse_u64(const std::string& s, const std::string& key) {
    try {
        return std::stoull(s, nullptr, 0);  // accepts 0x prefix
    } catch (const std::exception&) {
        throw ConfigError("invalid integer for " + key + ": '" + s + "'");
    }
}

double parse_double(const std::string& s, const std::string& key) {
    try {
        return std::stod(s);
    } catch (const std::exception&) {
        throw ConfigError("invalid number for " + key + ": '" + s + "'");
    }
}

bool parse_bool(const std::string& s, const std::string& key) {
    if (s == "true" || s == "1") return true;
    if (s == "false" || s == "0") return false;
    throw ConfigError("invalid bool for " + key + ": '" + s + "'");
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

// Field table shared by dump(), digest(), the text parser and the JSON
// parser, so every surface stays in sync.
struct Field {
    std::string key;
    std::function<std::string(const SimConfig&)> get;
    std::function<void(SimConfig&, const std::string&)> set;
};

std::string u64s(std::uint64_t v) { return std::to_string(v); }
std::string hexs(std::uint64_t v) {
    std::ostringstream os;
    os << "0x" << std::hex << v;
    return os.str();
}
std::string dbls(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}
std::string bools(bool v) { return v ? "true" : "false"; }

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        auto u64 = [&f](const std::string& key, auto member) {
            f.push_back({key,
                         [member](const SimConfig& c) { return u64s(c.*member); },
                         [member, key](SimConfig& c, const std::string& v) {
                             c.*member = parse_u64(v, key);
                         }});
        };
        auto add = [&f](const std::string& key, auto get, auto set) {
            f.push_back({key, std::move(get), std::move(set)});
        };
#define ENCSIM_U32(KEY, EXPR)                                                      \
    add(KEY, [](const SimConfig& c) { return u64s(c.EXPR); },                      \
        [](SimConfig& c, const std::string& v) {                                   \
            c.EXPR = static_cast<std::uint32_t>(parse_u64(v, KEY));                \
        })
#define ENCSIM_U64F(KEY, EXPR)                                                     \
    add(KEY, [](const SimConfig& c) { return u64s(c.EXPR); },                      \
        [](SimConfig& c, const std::string& v) { c.EXPR = parse_u64(v, KEY); })
#define ENCSIM_HEX(KEY, EXPR)                                                      \
    add(KEY, [](const SimConfig& c) { return hexs(c.EXPR); },                      \
        [](SimConfig& c, const std::string& v) { c.EXPR = parse_u64(v, KEY); })
#define ENCSIM_BOOL(KEY, EXPR)                                                     \
    add(KEY, [](const SimConfig& c) { return bools(c.EXPR); },                     \
        [](SimConfig& c, const std::string& v) { c.EXPR = parse_bool(v, KEY); })
#define ENCSIM_DBL(KEY, EXPR)                                                      \
    add(KEY, [](const SimConfig& c) { return dbls(c.EXPR); },                      \
        [](SimConfig& c, const std::string& v) { c.EXPR = parse_double(v, KEY); })

        ENCSIM_U32("schema_version", schema_version);
        ENCSIM_U32("tlb.itlb.sets", tlb.itlb.sets);
        ENCSIM_U32("tlb.itlb.ways", tlb.itlb.ways);
        ENCSIM_U32("tlb.dtlb.sets", tlb.dtlb.sets);
        ENCSIM_U32("tlb.dtlb.ways", tlb.dtlb.ways);
        ENCSIM_U32("tlb.l2.sets", tlb.l2.sets);
        ENCSIM_U32("tlb.l2.ways", tlb.l2.ways);
        ENCSIM_BOOL("tlb.shared_across_logical_cores", tlb.shared_across_logical_cores);
        ENCSIM_BOOL("tlb.pcid_selective_flush", tlb.pcid_selective_flush);
        add("tlb.replacement",
            [](const SimConfig& c) {
                return std::string(c.tlb.replacement == Replacement::Lru ? "lru" : "random");
            },
            [](SimConfig& c, const std::string& v) {
                if (v == "lru") c.tlb.replacement = Replacement::Lru;
                else if (v == "random") c.tlb.replacement = Replacement::Random;
                else throw ConfigError("tlb.replacement must be lru|random");
            });
        ENCSIM_U32("cache.l1.sets", cache.l1.sets);
        ENCSIM_U32("cache.l1.ways", cache.l1.ways);
        ENCSIM_U64F("cache.l1.latency", cache.l1.latency);
        ENCSIM_U32("cache.l2.sets", cache.l2.sets);
        ENCSIM_U32("cache.l2.ways", cache.l2.ways);
        ENCSIM_U64F("cache.l2.latency", cache.l2.latency);
        ENCSIM_U32("cache.l3.sets", cache.l3.sets);
        ENCSIM_U32("cache.l3.ways", cache.l3.ways);
        ENCSIM_U64F("cache.l3.latency", cache.l3.latency);
        ENCSIM_U32("cache.line_size", cache.line_size);
        ENCSIM_U32("cache.llc_slices", cache.llc_slices);
        add("cache.slice_hash",
            [](const SimConfig& c) {
                return std::string(c.cache.slice_hash == SliceHash::Single ? "single" : "xorfold");
            },
            [](SimConfig& c, const std::string& v) {
                if (v == "single") c.cache.slice_hash = SliceHash::Single;
                else if (v == "xorfold") c.cache.slice_hash = SliceHash::XorFold;
                else throw ConfigError("cache.slice_hash must be single|xorfold");
            });
        ENCSIM_BOOL("cache.inclusive_llc", cache.inclusive_llc);
        ENCSIM_BOOL("cache.next_line_prefetcher", cache.next_line_prefetcher);
        ENCSIM_U32("dram.channels", dram.channels);
        ENCSIM_U32("dram.dimms", dram.dimms);
        ENCSIM_U32("dram.ranks", dram.ranks);
        ENCSIM_U32("dram.banks", dram.banks);
        ENCSIM_U64F("dram.rows", dram.rows);
        ENCSIM_U32("dram.row_bytes", dram.row_bytes);
        ENCSIM_U32("dram.row_shift", dram.row_shift);
        ENCSIM_U32("dram.bank_lo", dram.bank_lo);
        ENCSIM_U32("dram.channel_bit", dram.channel_bit);
        ENCSIM_U32("dram.rank_bit", dram.rank_bit);
        ENCSIM_BOOL("dram.bank_xor_row", dram.bank_xor_row);
        ENCSIM_U64F("dram.latency_hit", dram.latency_hit);
        ENCSIM_U64F("dram.latency_conflict", dram.latency_conflict);
        ENCSIM_U64F("mem.page_walk_latency", mem.page_walk_latency);
        ENCSIM_U64F("mem.page_fault_aex_cost", mem.page_fault_aex_cost);
        ENCSIM_U64F("mem.shootdown_aex_cost", mem.shootdown_aex_cost);
        ENCSIM_U64F("mem.other_aex_cost", mem.other_aex_cost);
        ENCSIM_U64F("mem.background_interrupt_period", mem.background_interrupt_period);
        ENCSIM_HEX("prm.base", prm.base);
        ENCSIM_U64F("prm.size", prm.size);
        ENCSIM_BOOL("noise.enabled", noise.enabled);
        ENCSIM_DBL("noise.dram_sigma", noise.dram_sigma);
        ENCSIM_DBL("noise.probe_flip_prob", noise.probe_flip_prob);
        ENCSIM_DBL("noise.clock_sigma", noise.clock_sigma);
        ENCSIM_DBL("noise.clock_stale_prob", noise.clock_stale_prob);
        ENCSIM_DBL("noise.victim_timing_sigma", noise.victim_timing_sigma);
        ENCSIM_BOOL("log.enabled", log.enabled);
        ENCSIM_BOOL("log.access_events", log.access_events);
        ENCSIM_HEX("phys_bytes", phys_bytes);
        (void)u64;
#undef ENCSIM_U32
#undef ENCSIM_U64F
#undef ENCSIM_HEX
#undef ENCSIM_BOOL
#undef ENCSIM_DBL
        return f;
    }();
    return table;
}

void set_key(SimConfig& cfg, const std::string& key, const std::string& value) {
    if (key.rfind("scenario.", 0) == 0) {
        cfg.extra[key] = value;
        return;
    }
    for (const auto& f : fields()) {
        if (f.key == key) {
            f.set(cfg, value);
            return;
        }
    }
    throw ConfigError("unknown config key: " + key);
}

}  // namespace

void SimConfig::validate() const {
    require(schema_version == 1, "unsupported schema_version");
    require(pow2(tlb.itlb.sets) && pow2(tlb.dtlb.sets) && pow2(tlb.l2.sets),
            "TLB set counts must be powers of two");
    require(tlb.itlb.ways > 0 && tlb.dtlb.ways > 0 && tlb.l2.ways > 0,
            "TLB way counts must be positive");
    require(pow2(cache.l1.sets) && pow2(cache.l2.sets) && pow2(cache.l3.sets),
            "cache set counts must be powers of two");
    require(cache.l1.ways > 0 && cache.l2.ways > 0 && cache.l3.ways > 0,
            "cache way counts must be positive");
    require(cache.line_size == kLineSize, "line size must be 64");
    require(pow2(cache.llc_slices), "llc_slices must be a power of two");
    require(pow2(dram.channels) && pow2(dram.ranks) && pow2(dram.banks) && pow2(dram.rows),
            "DRAM geometry must use powers of two");
    require(dram.dimms == 1, "only 1 DIMM per channel is modeled");
    require(pow2(dram.row_bytes), "row_bytes must be a power of two");
    const unsigned bank_bits = static_cast<unsigned>(std::bit_width(dram.banks) - 1);
    require(dram.bank_lo >= kLineShift, "bank bits must lie above the line offset");
    require(dram.bank_lo + bank_bits <= dram.row_shift, "bank bits must lie below row bits");
    require(dram.channel_bit < dram.row_shift && dram.rank_bit < dram.row_shift,
            "channel/rank bits must lie below row bits");
    const std::uint64_t dram_bytes = std::uint64_t{dram.channels} * dram.dimms * dram.ranks *
                                     dram.banks * dram.rows * dram.row_bytes;
    require(phys_bytes <= dram_bytes, "phys_bytes exceeds DRAM capacity");
    require(prm.size > 0 && prm.base % kPageSize == 0 && prm.size % kPageSize == 0,
            "PRM must be page aligned and nonempty");
    require(prm.base % dram.row_bytes == 0 && prm.size % dram.row_bytes == 0,
            "PRM must be row aligned");
    require(prm.end() <= phys_bytes, "PRM outside physical range");
    require(mem.page_walk_latency > 0, "page_walk_latency must be positive");
}

void SimConfig::dump(std::ostream& os) const {
    for (const auto& f : fields()) os << f.key << " = " << f.get(*this) << "\n";
    for (const auto& [k, v] : extra) os << k << " = " << v << "\n";
}

std::string SimConfig::digest() const {
    std::ostringstream os;
    dump(os);
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : os.str()) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return hexs(h);
}

std::uint64_t SimConfig::extra_u64(const std::string& key, std::uint64_t fallback) const {
    auto it = extra.find(key);
    return it == extra.end() ? fallback : parse_u64(it->second, key);
}

double SimConfig::extra_double(const std::string& key, double fallback) const {
    auto it = extra.find(key);
    return it == extra.end() ? fallback : parse_double(it->second, key);
}

SimConfig SimConfig::testbed() { return SimConfig{}; }

SimConfig load_config(std::istream& in, const std::string& origin) {
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();
    SimConfig cfg;

    const auto first = text.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && text[first] == '{') {
        nlohmann::json j = nlohmann::json::parse(text);
        // Nested objects flatten to dotted keys; values may be numbers,
        // bools or strings.
        std::function<void(const nlohmann::json&, const std::string&)> walk =
            [&](const nlohmann::json& node, const std::string& prefix) {
                for (auto it = node.begin(); it != node.end(); ++it) {
                    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
                    if (it->is_object()) {
                        walk(*it, key);
                    } else if (it->is_boolean()) {
                        set_key(cfg, key, it->get<bool>() ? "true" : "false");
                    } else if (it->is_number_unsigned() || it->is_number_integer()) {
                        set_key(cfg, key, std::to_string(it->get<std::uint64_t>()));
                    } else if (it->is_number_float()) {
                        set_key(cfg, key, dbls(it->get<double>()));
                    } else if (it->is_string()) {
                        set_key(cfg, key, it->get<std::string>());
                    } else {
                        throw ConfigError(origin + ": unsupported JSON value at " + key);
                    }
                }
            };
        walk(j, "");
        cfg.validate();
        return cfg;
    }

    std::istringstream lines(text);
    std::string line;
    int lineno = 0;
    while (std::getline(lines, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            set_key(cfg, key, value);
        } catch (const ConfigError& e) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    cfg.validate();
    return cfg;
}

SimConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    return load_config(in, path);
}

}  // namespace encsim
