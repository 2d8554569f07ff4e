#include "encsim/victim.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace encsim {
namespace {

Cycle jittered(Cycle base, double sigma, SeededRng& rng, bool noiseless) {
    if (noiseless || sigma <= 0.0) return base;
    const std::int64_t j = rng.gaussian_int(sigma);
    if (j < 0 && static_cast<Cycle>(-j) >= base) return 1;
    return static_cast<Cycle>(static_cast<std::int64_t>(base) + j);
}

void push_access(std::vector<Step>& steps, VirtAddr va, AccessKind kind) {
    Step s;
    s.kind = StepKind::Access;
    s.va = va;
    s.access = kind;
    steps.push_back(s);
}

void push_compute(std::vector<Step>& steps, Cycle cost) {
    Step s;
    s.kind = StepKind::Compute;
    s.cost = cost;
    steps.push_back(s);
}

void push_marker(std::vector<Step>& steps, std::uint64_t id, std::uint64_t value) {
    Step s;
    s.kind = StepKind::Marker;
    s.marker = id;
    s.value = value;
    steps.push_back(s);
}

void finish_vpns(VictimProgram& v) {
    std::set<std::uint64_t> seen;
    for (const auto& [name, vpn] : v.pages) seen.insert(vpn);
    for (const Step& s : v.steps)
        if (s.kind == StepKind::Access) seen.insert(page_number(s.va));
    v.vpns.assign(seen.begin(), seen.end());
}

// Stable 64-bit hash for synthetic layouts (splitmix-style).
std::uint64_t hash_mix(std::uint64_t x, std::uint64_t salt) {
    std::uint64_t z = x + 0x9e3779b97f4a7c15ull * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

std::string random_key_bits(std::size_t nbits, SeededRng& rng) {
    std::string bits(nbits, '0');
    for (auto& c : bits) c = rng.bernoulli(0.5) ? '1' : '0';
    return bits;
}

// ---------------------------------------------------------------------------
// EdDSA

VictimProgram make_eddsa_victim(const std::string& key_bits, const EddsaParams& params,
                                SeededRng& vrng, bool noiseless) {
    if (key_bits.empty()) throw SimError("eddsa: empty key");
    if (key_bits.size() > 512) throw SimError("eddsa: key longer than 512 bits");
    for (char c : key_bits)
        if (c != '0' && c != '1') throw SimError("eddsa: key must be a bit string");

    VictimProgram v;
    v.name = "eddsa";
    v.pages["mul_point"] = params.mul_vpn;
    v.pages["dup_add"] = params.dup_add_vpn;
    v.pages["helpers"] = params.helpers_vpn;
    v.pages["test_bit"] = params.test_vpn;
    v.truth.secret_bits = key_bits;

    std::vector<std::string> dup_seq = params.dup_seq;
    if (dup_seq.empty()) {
        dup_seq.push_back("mul_point");
        for (int i = 0; i < 23; ++i) {
            dup_seq.push_back("dup_add");
            dup_seq.push_back("helpers");
        }
    }
    std::vector<std::string> add_seq = params.add_seq;
    if (add_seq.empty()) {
        for (int i = 0; i < 20; ++i) {
            add_seq.push_back("dup_add");
            add_seq.push_back("helpers");
        }
        add_seq.push_back("dup_add");
    }
    auto check_seq = [&v](const std::vector<std::string>& seq, const char* which) {
        std::uint64_t prev = ~0ull;
        for (const auto& role : seq) {
            auto it = v.pages.find(role);
            if (it == v.pages.end()) throw SimError(std::string("eddsa: unknown role in ") + which);
            if (it->second == prev)
                throw SimError(std::string("eddsa: adjacent repeat in ") + which);
            prev = it->second;
        }
    };
    check_seq(dup_seq, "dup_seq");
    check_seq(add_seq, "add_seq");

    auto visit = [&](const std::string& role, Cycle cost) {
        push_access(v.steps, v.pages.at(role) << kPageShift, AccessKind::CodeFetch);
        push_compute(v.steps, jittered(cost, params.visit_sigma, vrng, noiseless));
    };

    for (std::size_t i = 0; i < key_bits.size(); ++i) {
        push_marker(v.steps, kMarkBit, i);
        for (const auto& role : dup_seq) visit(role, params.dup_visit_cost);
        if (key_bits[i] == '1')
            for (const auto& role : add_seq) visit(role, params.add_visit_cost);
        visit("test_bit", params.dup_visit_cost);
    }
    // Function epilogue: the result normalization touches the helpers and
    // the mul/dup pages once more, closing the last observation interval.
    visit("mul_point", params.dup_visit_cost);
    visit("helpers", params.dup_visit_cost);
    visit("dup_add", params.dup_visit_cost);

    finish_vpns(v);
    return v;
}

// ---------------------------------------------------------------------------
// Hunspell

DictionaryLayout make_dictionary(const HunspellParams& params, std::size_t word_count,
                                 std::uint64_t seed) {
    DictionaryLayout d;
    d.params = params;
    SeededRng rng(mix_seed(seed, 0x68756e73ull));  // layout stream
    d.words.reserve(word_count);
    d.word_pages.reserve(word_count);
    for (std::size_t i = 0; i < word_count; ++i) {
        std::ostringstream name;
        name << "w" << i;
        d.words.push_back(name.str());
        const std::uint32_t span = params.chain_max - params.chain_min + 1;
        const std::size_t len = params.chain_min + rng.uniform(span);
        std::vector<std::uint64_t> pages;
        const std::uint64_t bucket =
            params.dict_base_vpn + hash_mix(i, seed) % params.dict_pages;
        pages.push_back(bucket);
        while (pages.size() < len) {
            const std::uint64_t next = params.dict_base_vpn + rng.uniform(params.dict_pages);
            if (next == pages.back()) continue;  // chain never revisits in place
            pages.push_back(next);
        }
        d.word_pages.push_back(std::move(pages));
    }
    return d;
}

VictimProgram make_hunspell_victim(const DictionaryLayout& dict,
                                   const std::vector<std::size_t>& lookups, SeededRng& vrng,
                                   bool noiseless) {
    const HunspellParams& p = dict.params;
    VictimProgram v;
    v.name = "hunspell";
    v.pages["trigger"] = p.trigger_vpn;
    for (std::uint32_t i = 0; i < p.dict_pages; ++i)
        v.pages["dict" + std::to_string(i)] = p.dict_base_vpn + i;

    for (std::size_t idx : lookups) {
        if (idx >= dict.word_pages.size()) throw SimError("hunspell: lookup out of range");
        push_marker(v.steps, kMarkWord, idx);
        // The lookup entry touches the hash-table header first; modeling it
        // as a data read keeps the fingerprint visible to dTLB cleaners.
        push_access(v.steps, p.trigger_vpn << kPageShift, AccessKind::DataRead);
        push_compute(v.steps, jittered(200, p.visit_sigma, vrng, noiseless));
        for (std::uint64_t vpn : dict.word_pages[idx]) {
            push_access(v.steps, vpn << kPageShift, AccessKind::DataRead);
            push_compute(v.steps, jittered(p.visit_cost, p.visit_sigma, vrng, noiseless));
        }
        push_compute(v.steps, p.word_gap);
        v.truth.word_pages.push_back(dict.word_pages[idx]);
    }
    finish_vpns(v);
    return v;
}

// ---------------------------------------------------------------------------
// Bloom filter

double BloomFilter::fill_ratio() const {
    std::size_t set = 0;
    for (bool b : bits) set += b;
    return static_cast<double>(set) / static_cast<double>(bits.size());
}

std::uint32_t BloomFilter::hashes_run(std::uint64_t x) const {
    for (std::uint32_t i = 0; i < params.hash_count; ++i) {
        if (!bits[hash_mix(x, i) % params.filter_bits]) return i + 1;
    }
    return params.hash_count;
}

bool BloomFilter::probe_all_set(std::uint64_t x) const {
    for (std::uint32_t i = 0; i < params.hash_count; ++i)
        if (!bits[hash_mix(x, i) % params.filter_bits]) return false;
    return true;
}

BloomFilter make_bloom_filter(const BloomParams& params, std::uint64_t seed) {
    BloomFilter f;
    f.params = params;
    f.bits.assign(params.filter_bits, false);
    SeededRng rng(mix_seed(seed, 0x626c6f6full));
    for (std::uint32_t i = 0; i < params.inserted; ++i) {
        const std::uint64_t x = rng.next_u64();
        f.members.push_back(x);
        for (std::uint32_t h = 0; h < params.hash_count; ++h)
            f.bits[hash_mix(x, h) % params.filter_bits] = true;
    }
    return f;
}

VictimProgram make_bloom_victim(const BloomFilter& filter,
                                const std::vector<std::uint64_t>& queries, SeededRng& vrng,
                                bool noiseless) {
    const BloomParams& p = filter.params;
    VictimProgram v;
    v.name = "bloom";
    v.pages["code"] = p.code_vpn;
    v.pages["exit"] = p.exit_vpn;
    // Ground truth is true insertion membership; the filter's own false
    // positives run all hashes and are indistinguishable by timing.
    std::vector<std::uint64_t> inserted = filter.members;
    std::sort(inserted.begin(), inserted.end());
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const std::uint64_t x = queries[i];
        const std::uint32_t k = filter.hashes_run(x);
        push_marker(v.steps, kMarkQuery, i);
        for (std::uint32_t h = 0; h < k; ++h) {
            push_access(v.steps, p.code_vpn << kPageShift, AccessKind::CodeFetch);
            push_compute(v.steps, jittered(p.hash_cost, p.hash_sigma, vrng, noiseless));
        }
        // XSAVE writes the exit page when the query leaves the enclave.
        push_access(v.steps, p.exit_vpn << kPageShift, AccessKind::DataWrite);
        push_compute(v.steps, p.query_gap);
        v.truth.query_is_member.push_back(
            std::binary_search(inserted.begin(), inserted.end(), x));
        v.truth.query_hashes_run.push_back(k);
    }
    finish_vpns(v);
    return v;
}

// ---------------------------------------------------------------------------
// Binary search

VictimProgram make_binsearch_victim(std::uint32_t key, const BinSearchParams& params) {
    const std::uint32_t total = params.pages * params.ints_per_page;
    if (key >= total) throw SimError("binsearch: key out of range");
    VictimProgram v;
    v.name = "binsearch";
    for (std::uint32_t i = 0; i < params.pages; ++i)
        v.pages["table" + std::to_string(i)] = params.table_base_vpn + i;

    std::int64_t lo = 0, hi = static_cast<std::int64_t>(total) - 1;
    while (lo <= hi) {
        const std::int64_t mid = (lo + hi) / 2;
        const VirtAddr va = (params.table_base_vpn << kPageShift) +
                            static_cast<std::uint64_t>(mid) * 4;
        push_access(v.steps, va, AccessKind::DataRead);
        push_compute(v.steps, params.probe_cost);
        v.truth.page_sequence.push_back(page_number(va));
        if (static_cast<std::int64_t>(key) == mid) break;
        if (static_cast<std::int64_t>(key) < mid)
            hi = mid - 1;
        else
            lo = mid + 1;
    }
    finish_vpns(v);
    return v;
}

// ---------------------------------------------------------------------------
// Gap SumInt

VictimProgram make_gap_victim(std::uint32_t invocations, const GapParams& params,
                              SeededRng& vrng, bool noiseless) {
    VictimProgram v;
    v.name = "gap";
    v.pages["code"] = params.code_vpn;
    v.pages["data"] = params.data_vpn;
    v.period = params.invoke_period;
    const VirtAddr code = params.code_vpn << kPageShift;
    const VirtAddr data = params.data_vpn << kPageShift;
    const std::uint64_t chunk = 1024;

    for (std::uint32_t i = 0; i < invocations; ++i) {
        Step w;
        w.kind = StepKind::WaitPeriod;
        w.value = i;
        v.steps.push_back(w);
        const bool taken = vrng.bernoulli(params.p_small);
        push_marker(v.steps, kMarkInvocation, (std::uint64_t{i} << 1) | (taken ? 1 : 0));
        // Arrival jitter keeps invocations from phase-locking to the probe.
        if (!noiseless && params.period_jitter > 0.0) {
            const Cycle span = static_cast<Cycle>(params.invoke_period * params.period_jitter);
            if (span > 0) push_compute(v.steps, vrng.uniform(span));
        }
        push_access(v.steps, code + params.common_chunk * chunk, AccessKind::CodeFetch);
        push_access(v.steps, data, AccessKind::DataRead);
        push_access(v.steps, data + 64, AccessKind::DataRead);
        push_compute(v.steps, params.op_cost);
        if (taken) {
            push_access(v.steps, code + params.target_chunk * chunk, AccessKind::CodeFetch);
        } else {
            push_access(v.steps, code + params.else_chunk * chunk, AccessKind::CodeFetch);
        }
        push_compute(v.steps, params.op_cost);
        v.truth.branch_taken.push_back(taken);
    }
    finish_vpns(v);
    return v;
}

// ---------------------------------------------------------------------------
// Row-toggle DRAMA target

VictimProgram make_row_toggle_victim(std::uint32_t iterations, double touch_prob,
                                     const RowToggleParams& params, SeededRng& vrng) {
    VictimProgram v;
    v.name = "row-toggle";
    v.pages["target"] = params.target_vpn;
    v.period = params.period;
    const VirtAddr d = (params.target_vpn << kPageShift) + params.target_offset;
    for (std::uint32_t i = 0; i < iterations; ++i) {
        Step w;
        w.kind = StepKind::WaitPeriod;
        w.value = i;
        v.steps.push_back(w);
        const bool touch = vrng.bernoulli(touch_prob);
        push_marker(v.steps, kMarkInvocation, (std::uint64_t{i} << 1) | (touch ? 1 : 0));
        if (touch) {
            Step f;
            f.kind = StepKind::FlushLine;
            f.va = d;
            v.steps.push_back(f);
            push_access(v.steps, d, AccessKind::DataRead);
        }
        v.truth.branch_taken.push_back(touch);
    }
    finish_vpns(v);
    return v;
}

// ---------------------------------------------------------------------------
// Multi-checkpoint (FreeType stand-in)

VictimProgram make_checkpoint_victim(int secret_class, std::uint32_t samples,
                                     const CheckpointParams& params, SeededRng& vrng,
                                     bool noiseless) {
    if (secret_class < 0 || secret_class >= static_cast<int>(params.class_count))
        throw SimError("checkpoint: class out of range");
    VictimProgram v;
    v.name = "checkpoint";
    v.pages["trigger"] = params.trigger_vpn;
    for (std::uint32_t i = 0; i < params.pair_count; ++i) {
        v.pages["alpha" + std::to_string(i)] = params.page_base_vpn + 2 * i;
        v.pages["beta" + std::to_string(i)] = params.page_base_vpn + 2 * i + 1;
    }
    v.truth.secret_class = secret_class;

    for (std::uint32_t s = 0; s < samples; ++s) {
        push_marker(v.steps, kMarkSample, s);
        push_access(v.steps, params.trigger_vpn << kPageShift, AccessKind::CodeFetch);
        push_compute(v.steps, 200);
        for (std::uint32_t i = 0; i < params.pair_count; ++i) {
            // Profile durations: a different linear mix per pair, so every
            // class gets a distinct 5-vector.
            const Cycle d = params.base_cost +
                            params.class_stride *
                                ((static_cast<Cycle>(secret_class) * (i + 1) + i * 3) %
                                 params.class_count);
            push_access(v.steps, v.pages["alpha" + std::to_string(i)] << kPageShift,
                        AccessKind::CodeFetch);
            push_compute(v.steps, jittered(d, params.sigma, vrng, noiseless));
            push_access(v.steps, v.pages["beta" + std::to_string(i)] << kPageShift,
                        AccessKind::CodeFetch);
        }
        push_compute(v.steps, 500);
    }
    finish_vpns(v);
    return v;
}

// ---------------------------------------------------------------------------
// Square-and-multiply

VictimProgram make_square_multiply_victim(const std::string& key_bits,
                                          const SquareMultiplyParams& params) {
    if (key_bits.empty()) throw SimError("square-multiply: empty key");
    VictimProgram v;
    v.name = "square-multiply";
    v.pages["square"] = params.square_vpn;
    v.pages["multiply"] = params.multiply_vpn;
    v.truth.secret_bits = key_bits;
    const VirtAddr sq = params.square_vpn << kPageShift;
    const VirtAddr mul = params.multiply_vpn << kPageShift;

    for (std::size_t i = 0; i < key_bits.size(); ++i) {
        push_marker(v.steps, kMarkBit, i);
        for (std::uint32_t a = 0; a < params.accesses_per_op; ++a) {
            push_access(v.steps, sq, AccessKind::CodeFetch);
            push_compute(v.steps, params.op_access_cost);
        }
        push_compute(v.steps, params.op_gap);
        if (key_bits[i] == '1') {
            for (std::uint32_t a = 0; a < params.accesses_per_op; ++a) {
                push_access(v.steps, mul, AccessKind::CodeFetch);
                push_compute(v.steps, params.op_access_cost);
            }
            push_compute(v.steps, params.op_gap);
        }
    }
    finish_vpns(v);
    return v;
}

// ---------------------------------------------------------------------------
// Layout file

VictimLayoutFile load_victim_layout(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read layout file: " + path);
    VictimLayoutFile f;
    std::string line;
    int lineno = 0;
    bool versioned = false;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string tok;
        if (!(ls >> tok)) continue;
        auto fail = [&](const std::string& msg) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + msg);
        };
        if (tok == "layout_version") {
            if (!(ls >> f.version) || f.version != 1) fail("unsupported layout_version");
            versioned = true;
        } else if (tok == "victim") {
            if (!(ls >> f.victim)) fail("missing victim name");
        } else if (tok == "page") {
            std::string role, vpn;
            if (!(ls >> role >> vpn)) fail("page needs <role> <vpn>");
            f.pages[role] = std::stoull(vpn, nullptr, 0);
        } else if (tok == "seq") {
            std::string name, role;
            if (!(ls >> name)) fail("seq needs a name");
            auto& seq = f.seqs[name];
            while (ls >> role) seq.push_back(role);
            if (seq.empty()) fail("seq needs at least one role");
        } else if (tok == "word") {
            std::string word, vpn;
            if (!(ls >> word)) fail("word needs a name");
            std::vector<std::uint64_t> pages;
            while (ls >> vpn) pages.push_back(std::stoull(vpn, nullptr, 0));
            if (pages.empty()) fail("word needs at least one page");
            f.words.emplace_back(word, std::move(pages));
        } else {
            fail("unknown directive: " + tok);
        }
    }
    if (!versioned) throw ConfigError(path + ": missing layout_version");
    return f;
}

void apply_layout(EddsaParams& params, const VictimLayoutFile& file) {
    auto page = [&](const char* role) -> std::optional<std::uint64_t> {
        auto it = file.pages.find(role);
        if (it == file.pages.end()) return std::nullopt;
        return it->second;
    };
    if (auto p = page("mul_point")) params.mul_vpn = *p;
    if (auto p = page("dup_add")) params.dup_add_vpn = *p;
    if (auto p = page("helpers")) params.helpers_vpn = *p;
    if (auto p = page("test_bit")) params.test_vpn = *p;
    if (auto it = file.seqs.find("dup"); it != file.seqs.end()) params.dup_seq = it->second;
    if (auto it = file.seqs.find("add"); it != file.seqs.end()) params.add_seq = it->second;
}

DictionaryLayout dictionary_from_layout(const HunspellParams& params,
                                        const VictimLayoutFile& file) {
    DictionaryLayout d;
    d.params = params;
    for (const auto& [word, pages] : file.words) {
        d.words.push_back(word);
        d.word_pages.push_back(pages);
    }
    if (d.words.empty()) throw ConfigError("layout file defines no words");
    return d;
}

}  // namespace encsim
