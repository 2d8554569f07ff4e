#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "encsim/rng.hpp"
#include "encsim/types.hpp"

namespace encsim {

enum class StepKind : std::uint8_t { Access, Compute, WaitPeriod, Marker, FlushLine };

// Marker ids double as EventKind::Marker payload `a`.
enum MarkerId : std::uint64_t {
    kMarkBit = 1,
    kMarkWord = 2,
    kMarkQuery = 3,
    kMarkInvocation = 4,
    kMarkSample = 5,
};

struct Step {
    StepKind kind;
    VirtAddr va = 0;
    AccessKind access = AccessKind::DataRead;
    Cycle cost = 0;           // Compute
    std::uint64_t marker = 0; // Marker id
    std::uint64_t value = 0;  // Marker payload / WaitPeriod index
};

// Ground truth stays inside the victim object; attack strategies never see
// it. The harness reads it for scoring only.
struct GroundTruth {
    std::string secret_bits;
    std::vector<std::vector<std::uint64_t>> word_pages;  // per lookup, ordered vpns
    std::vector<bool> query_is_member;
    std::vector<std::uint32_t> query_hashes_run;
    std::vector<bool> branch_taken;
    std::vector<std::uint64_t> page_sequence;
    int secret_class = -1;
};

struct VictimProgram {
    std::string name;
    std::map<std::string, std::uint64_t> pages;  // role -> vpn
    std::vector<std::uint64_t> vpns;             // all pages, sorted
    std::vector<Step> steps;
    Cycle period = 0;  // WaitPeriod stride, 0 if unused
    GroundTruth truth;
};

// ---------------------------------------------------------------------------
// EdDSA scalar multiplication: per key bit a fixed page-visit pattern for
// point doubling (48 visits including the bit-final test_bit visit) plus an
// extra addition pattern for 1-bits (41 more visits, 89 total). Costs are
// tuned so a 0-bit takes about 19,700 cycles and a 1-bit about 27,900.
struct EddsaParams {
    std::uint64_t mul_vpn = 0x400;
    std::uint64_t dup_add_vpn = 0x401;
    std::uint64_t helpers_vpn = 0x402;
    std::uint64_t test_vpn = 0x403;
    Cycle dup_visit_cost = 410;
    Cycle add_visit_cost = 200;
    double visit_sigma = 0.0;
    std::vector<std::string> dup_seq;  // default: mul_point + 23 x (dup_add helpers)
    std::vector<std::string> add_seq;  // default: 20 x (dup_add helpers) + dup_add
};
VictimProgram make_eddsa_victim(const std::string& key_bits, const EddsaParams& params,
                                SeededRng& vrng, bool noiseless);

// Random key helper (MSB-first bit string).
std::string random_key_bits(std::size_t nbits, SeededRng& rng);

// ---------------------------------------------------------------------------
// Hunspell-style dictionary: hash buckets with linked lists spanning pages;
// looking a word up walks its chain's ordered page list.
struct HunspellParams {
    std::uint64_t dict_base_vpn = 0x600;
    std::uint32_t dict_pages = 40;
    std::uint64_t trigger_vpn = 0x5f0;  // page of the spell() entry point
    std::uint32_t chain_min = 3;
    std::uint32_t chain_max = 8;
    Cycle visit_cost = 380;
    Cycle word_gap = 1200;
    double visit_sigma = 0.0;
};

struct DictionaryLayout {
    HunspellParams params;
    std::vector<std::string> words;
    std::vector<std::vector<std::uint64_t>> word_pages;  // ordered, bucket page first
};
DictionaryLayout make_dictionary(const HunspellParams& params, std::size_t word_count,
                                 std::uint64_t seed);
VictimProgram make_hunspell_victim(const DictionaryLayout& dict,
                                   const std::vector<std::size_t>& lookups, SeededRng& vrng,
                                   bool noiseless);

// ---------------------------------------------------------------------------
// Bloom filter on a single enclave page plus the exit page: one hash per
// probe position, early exit on the first zero bit.
struct BloomParams {
    std::uint64_t code_vpn = 0x700;
    std::uint64_t exit_vpn = 0x701;
    std::uint32_t filter_bits = 1024;
    std::uint32_t hash_count = 10;
    std::uint32_t inserted = 150;
    Cycle hash_cost = 436;
    Cycle query_gap = 800;
    double hash_sigma = 10.0;
};

struct BloomFilter {
    BloomParams params;
    std::vector<bool> bits;
    std::vector<std::uint64_t> members;
    double fill_ratio() const;
    // Number of hashes a query executes: early exit at the first zero bit,
    // so a zero at probe i stops the query after i hashes.
    std::uint32_t hashes_run(std::uint64_t x) const;
    bool probe_all_set(std::uint64_t x) const;
    bool contains(std::uint64_t x) const { return probe_all_set(x); }
};
BloomFilter make_bloom_filter(const BloomParams& params, std::uint64_t seed);
VictimProgram make_bloom_victim(const BloomFilter& filter,
                                const std::vector<std::uint64_t>& queries, SeededRng& vrng,
                                bool noiseless);

// ---------------------------------------------------------------------------
// Binary search over 16 contiguous data pages of 1024 integers each.
struct BinSearchParams {
    std::uint64_t table_base_vpn = 0x800;
    std::uint32_t pages = 16;
    std::uint32_t ints_per_page = 1024;
    Cycle probe_cost = 180;
};
VictimProgram make_binsearch_victim(std::uint32_t key, const BinSearchParams& params);

// ---------------------------------------------------------------------------
// Gap SumInt: small+small operands take the immediate-integer branch whose
// code chunk is the cache-DRAM target; anything else runs the large-number
// path in a different bank chunk of the same page.
struct GapParams {
    std::uint64_t code_vpn = 0x900;
    std::uint64_t data_vpn = 0x910;
    std::uint32_t target_chunk = 0;  // 1KB chunk index of the taken branch
    std::uint32_t common_chunk = 1;
    std::uint32_t else_chunk = 2;
    Cycle invoke_period = 5000;  // "every 5 us" at 1 cycle per ns
    double period_jitter = 0.2;  // uniform fraction of the period
    Cycle op_cost = 120;
    double p_small = 0.5;
};
VictimProgram make_gap_victim(std::uint32_t invocations, const GapParams& params,
                              SeededRng& vrng, bool noiseless);

// ---------------------------------------------------------------------------
// DRAMA probe target: on scheduled iterations flushes and touches a single
// address so the reference reaches its DRAM row; idles otherwise.
struct RowToggleParams {
    std::uint64_t target_vpn = 0xc00;
    std::uint32_t target_offset = 0x240;
    Cycle period = 1500;
};
VictimProgram make_row_toggle_victim(std::uint32_t iterations, double touch_prob,
                                     const RowToggleParams& params, SeededRng& vrng);

// ---------------------------------------------------------------------------
// Multi-checkpoint victim standing in for the FreeType glyph renderer: the
// secret class selects one timing profile over five alpha/beta page pairs.
struct CheckpointParams {
    std::uint64_t trigger_vpn = 0xa00;
    std::uint64_t page_base_vpn = 0xa01;
    std::uint32_t pair_count = 5;
    std::uint32_t class_count = 27;
    Cycle base_cost = 800;
    Cycle class_stride = 90;
    double sigma = 12.0;
};
VictimProgram make_checkpoint_victim(int secret_class, std::uint32_t samples,
                                     const CheckpointParams& params, SeededRng& vrng,
                                     bool noiseless);

// ---------------------------------------------------------------------------
// Square-and-multiply exponentiation (the Prime+Probe victim): every bit
// runs the square routine, 1-bits also the multiply routine.
struct SquareMultiplyParams {
    std::uint64_t square_vpn = 0xb00;
    std::uint64_t multiply_vpn = 0xb01;
    std::uint32_t accesses_per_op = 16;
    Cycle op_access_cost = 60;
    Cycle op_gap = 2100;  // modular reduction between operations
};
VictimProgram make_square_multiply_victim(const std::string& key_bits,
                                          const SquareMultiplyParams& params);

// ---------------------------------------------------------------------------
// Victim layout pinning file (documented in the README):
//   layout_version 1
//   victim <name>
//   page <role> <hex vpn>
//   seq <name> <role...>
//   word <word> <hex vpn...>
struct VictimLayoutFile {
    int version = 1;
    std::string victim;
    std::map<std::string, std::uint64_t> pages;
    std::map<std::string, std::vector<std::string>> seqs;
    std::vector<std::pair<std::string, std::vector<std::uint64_t>>> words;
};
VictimLayoutFile load_victim_layout(const std::string& path);
void apply_layout(EddsaParams& params, const VictimLayoutFile& file);
DictionaryLayout dictionary_from_layout(const HunspellParams& params,
                                        const VictimLayoutFile& file);

}  // namespace encsim
